import io
import os

import numpy as np
import pandas as pd
import pytest

from conftest import sphere
from gsm_field import cli
from gsm_field.errors import ParseError
from gsm_field.geometry import save_ellipsoids

SLICE = "0 0.5 1,1 0 0,0 1 0,0.4 0.2,4 3"


def run(*argv):
    return cli.GSMFieldPipeline().run(list(argv))


def read_stdout(capsys):
    return pd.read_csv(io.StringIO(capsys.readouterr().out))


def test_parse_robot():
    robot = cli.parse_robot(cli.DEFAULT_ROBOT)
    np.testing.assert_allclose(robot.axes, [0.15, 0.15, 0.07])
    np.testing.assert_allclose(cli.parse_robot("0.3, 0.2, 0.1").axes, [0.3, 0.2, 0.1])
    for text in ["0.1 0.2", "0.1 0.2 x"]:
        with pytest.raises(ParseError):
            cli.parse_robot(text)


def test_parse_prune():
    assert cli.parse_prune('off') is None
    assert cli.parse_prune('0') is None
    assert cli.parse_prune('5') == 5
    with pytest.raises(ParseError):
        cli.parse_prune('some')
    assert cli.parse_formats('png, pdf') == ['png', 'pdf']
    assert cli.parse_formats('') == []


def test_workflow(tmp_path, capsys):
    cloud = str(tmp_path / 'wall.xyz')
    model = str(tmp_path / 'wall.gsm')
    assert run('scene', '--kind', 'wall', '--points', '2000', '--seed', '1', '--out', cloud) == 0
    assert len(np.loadtxt(cloud)) == 2000

    assert run('fit', '--cloud', cloud, '--components', '4', '--out', model) == 0
    summary = read_stdout(capsys)
    assert list(summary.columns) == ['components', 'log_likelihood', 'iterations']
    assert summary['components'][0] == 4
    assert os.path.isfile(model)

    pred, truth = str(tmp_path / 'pred'), str(tmp_path / 'truth')
    assert run('field', '--model', model, '--slice', SLICE, '--out', pred, '--figure', 'png') == 0
    for suffix in ['.dist.csv', '.grad.csv', '.dist.ppm', '.dist.png']:
        assert os.path.isfile(pred + suffix)

    assert run('-q', 'truth', '--cloud', cloud, '--slice', SLICE, '--out', truth, '--samples', '500') == 0
    capsys.readouterr()
    assert run('metrics', '--pred', pred, '--truth', truth) == 0
    report = read_stdout(capsys)
    assert list(report.columns) == ['rmse', 'ces', 'cells']
    assert report['cells'][0] == 12
    assert report['rmse'][0] <= 0.1

    prob = str(tmp_path / 'prob')
    assert run('prob', '--model', model, '--slice', SLICE, '--out', prob, '--blend', 'off') == 0
    for suffix in ['.prob.csv', '.prob.ppm', '.iso.csv']:
        assert os.path.isfile(prob + suffix)
    frame = pd.read_csv(prob + '.prob.csv')
    assert len(frame) == 12
    assert frame['probability'].between(0, 1).all()


def test_exit_codes(tmp_path):
    empty_cloud = tmp_path / 'empty.xyz'
    empty_cloud.write_text("# no points\n")
    assert run('fit', '--cloud', str(empty_cloud), '--out', str(tmp_path / 'model.gsm')) == 2

    empty_model = tmp_path / 'empty.gsm'
    empty_model.write_text("GSM 3 0 3\n")
    assert run('field', '--model', str(empty_model), '--slice', SLICE, '--out', str(tmp_path / 'out')) == 4
    assert run('prob', '--model', str(empty_model), '--slice', SLICE, '--out', str(tmp_path / 'out')) == 4

    assert run('field', '--model', str(empty_model), '--slice', '0 0 0,1 0 0', '--out', str(tmp_path / 'out')) == 2
    assert run('field', '--model', str(tmp_path / 'missing.gsm'), '--slice', SLICE,
               '--out', str(tmp_path / 'out')) == 2

    with pytest.raises(SystemExit) as info:
        cli.main(['field', '--slice', SLICE])
    assert info.value.code == 2


def test_environment_defaults(monkeypatch):
    monkeypatch.setenv('GSM_FIELD_K', '1')
    monkeypatch.setenv('GSM_FIELD_MODEL', 'wall.gsm')
    args = cli.GSMFieldPipeline().parse_args(['prob', '--slice', SLICE, '--out', 'prob'])
    assert args.K == 1
    assert args.model == 'wall.gsm'
    # Explicit arguments take precedence
    assert cli.GSMFieldPipeline().parse_args(['prob', '--slice', SLICE, '--out', 'o', '--K', '3']).K == 3


def test_invalid_environment_default(monkeypatch):
    monkeypatch.setenv('GSM_FIELD_K', 'many')
    with pytest.raises(ParseError):
        cli.GSMFieldPipeline()
    with pytest.raises(SystemExit) as info:
        cli.main(['bench', '--pairs', '1'])
    assert info.value.code == 2


def test_bench(tmp_path, capsys):
    timings = str(tmp_path / 'timings.csv')
    assert run('bench', '--pairs', '2', '--warmup', '1', '--device-label', 'desk', '--out', timings) == 0
    summary = read_stdout(capsys)
    assert list(summary.columns) == ['Device', 'Init', 'Dist+Grad', 'Coll. Prob.', 'Total']
    assert summary['Device'][0] == 'desk'
    assert len(pd.read_csv(timings)) == 2


def test_pairs(tmp_path, capsys):
    first, second = str(tmp_path / 'first.txt'), str(tmp_path / 'second.txt')
    save_ellipsoids([sphere([0, 0, 0])], first)
    save_ellipsoids([sphere([4, 0, 0]), sphere([1.5, 0, 0])], second)
    assert run('pairs', '--first', first, '--second', second) == 0
    frame = read_stdout(capsys)
    assert list(frame.columns) == ['first', 'second', 'distance', 'colliding', 'gx', 'gy', 'gz']
    np.testing.assert_allclose(frame['distance'], [2, 0], atol=1e-9)
    np.testing.assert_array_equal(frame['colliding'], [0, 1])
    np.testing.assert_allclose(frame[['gx', 'gy', 'gz']].to_numpy()[0], [-1, 0, 0], atol=1e-9)
    assert frame[['gx', 'gy', 'gz']].iloc[1].isna().all()
