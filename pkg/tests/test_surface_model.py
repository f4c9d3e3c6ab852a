import numpy as np
import pytest

from conftest import disc_component
from gsm_field import surface_model
from gsm_field.callback import HistoryCallback
from gsm_field.errors import (DimensionMismatch, EmptyModel, InvalidK, InvalidModel, ParseError, TooFewPoints)
from gsm_field.surface_model import GaussianComponent, SurfaceModel


def _point_model(means):
    return SurfaceModel([GaussianComponent(1 / len(means), mean, 0.01 * np.eye(3)) for mean in means])


@pytest.mark.parametrize('k', [1, 5, 9])
def test_knn_matches_linear_scan(k, rng):
    means = rng.uniform(-5, 5, (1000, 3))
    model = _point_model(means)
    for point in rng.uniform(-6, 6, (100, 3)):
        distances = np.linalg.norm(means - point, axis=1)
        expected = np.lexsort((np.arange(len(means)), distances))[:k]
        np.testing.assert_array_equal(model.knn(point, k), expected)


def test_knn_ties_and_clamping():
    model = _point_model(np.array([[0, 0, 5], [1, 0, 0], [-1, 0, 0], [0, 1, 0]], dtype=float))
    np.testing.assert_array_equal(model.knn(np.zeros(3), 2), [1, 2])
    np.testing.assert_array_equal(model.knn(np.zeros(3), 3), [1, 2, 3])
    np.testing.assert_array_equal(surface_model.knn(model, np.zeros(3), 10), [1, 2, 3, 0])
    with pytest.raises(InvalidK):
        model.knn(np.zeros(3), 0)
    with pytest.raises(EmptyModel):
        SurfaceModel([]).knn(np.zeros(3), 1)


def test_model_validation():
    with pytest.raises(InvalidModel):
        SurfaceModel([disc_component(0.5, [0, 0, 0], [1, 1, 1]), disc_component(0.4, [1, 0, 0], [1, 1, 1])])
    with pytest.raises(InvalidModel):
        SurfaceModel([disc_component(1.0, [0, 0, 0], [1, 1, 1]), disc_component(0.0, [1, 0, 0], [1, 1, 1])])
    with pytest.raises(DimensionMismatch):
        SurfaceModel([disc_component(0.5, [0, 0, 0], [1, 1, 1]), disc_component(0.5, [1, 0], [1, 1])])
    empty = SurfaceModel([])
    assert empty.size == 0 and empty.dim == 3


def test_isocontour_level():
    model = SurfaceModel([disc_component(1.0, [0, 0, 0], [0.3, 0.2, 0.1], level=2.0)], level=2.0)
    np.testing.assert_allclose(model.ellipsoids[0].axes, [0.3, 0.2, 0.1])
    np.testing.assert_allclose(model.with_level(1.0).ellipsoids[0].axes, [0.15, 0.1, 0.05])


def test_density_integrates_to_one():
    model = SurfaceModel([GaussianComponent(0.3, [-0.5, 0, 0], 0.25 * np.eye(3)),
                          GaussianComponent(0.7, [0.5, 0, 0], np.diag([0.25, 0.16, 0.36]))])
    rng = np.random.default_rng(1)
    points = rng.uniform(-3, 3, (1000000, 3))
    assert 6 ** 3 * model.density(points).mean() == pytest.approx(1, abs=0.03)
    with pytest.raises(EmptyModel):
        SurfaceModel([]).log_density(points[:5])


def test_fit_single_component(rng):
    covariance = np.array([[0.04, 0.01, 0], [0.01, 0.02, 0.005], [0, 0.005, 0.01]])
    mean = np.array([1.0, -2.0, 0.5])
    points = rng.multivariate_normal(mean, covariance, size=5000)
    model = surface_model.fit_gmm(points, 1, seed=0)
    (component,) = model.components
    assert component.weight == pytest.approx(1)
    assert np.all(np.abs(component.mean - mean) < 4 * np.sqrt(np.diag(covariance) / len(points)))
    assert np.linalg.norm(component.covariance - covariance) < 0.1 * np.linalg.norm(covariance)
    assert model.level == surface_model.DEFAULT_LEVEL


def test_fit_log_likelihood_is_monotone():
    rng = np.random.default_rng(3)
    points = np.concatenate([rng.normal(center, 0.2, (300, 3)) for center in [[0, 0, 0], [2, 0, 0], [0, 2, 1]]])
    history = HistoryCallback()
    model = surface_model.fit_gmm(points, 3, seed=4, callback=history)
    assert model.size == 3
    assert len(history.log_likelihoods) >= 2
    assert np.all(np.diff(history.log_likelihoods) >= -1e-8 * abs(history.final[1]))
    np.testing.assert_array_equal(history.iterations, np.arange(1, len(history.iterations) + 1))


def test_fit_singletons():
    points = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    model = surface_model.fit_gmm(points, 4, seed=0)
    assert model.size == 4
    np.testing.assert_allclose(np.sort(model.weights), 0.25)
    for component in model.components:
        assert np.linalg.eigvalsh(component.covariance).min() >= surface_model.COVARIANCE_FLOOR * (1 - 1e-9)


def test_fit_errors():
    with pytest.raises(TooFewPoints):
        surface_model.fit_gmm(np.zeros((3, 3)), 5)
    with pytest.raises(DimensionMismatch):
        surface_model.fit_gmm(np.zeros((10, 4)), 2)
    points = np.ones((10, 3))
    points[3, 1] = np.nan
    with pytest.raises(ParseError):
        surface_model.fit_gmm(points, 2)


def test_wall_components_are_flat(wall_model):
    assert wall_model.size == 8
    assert wall_model.weights.sum() == pytest.approx(1)
    for component in wall_model.components:
        values, vectors = np.linalg.eigh(component.covariance)
        assert values[0] <= 4e-4
        # The flattest direction is perpendicular to the wall
        assert abs(vectors[1, 0]) >= np.cos(np.radians(10))


def test_model_round_trip(tmp_path, wall_model):
    filename = str(tmp_path / 'models' / 'wall.gsm')
    surface_model.save_model(wall_model, filename)
    loaded = surface_model.load_model(filename)
    assert loaded.level == wall_model.level
    for a, b in zip(wall_model.components, loaded.components):
        assert a.weight == b.weight
        np.testing.assert_array_equal(a.mean, b.mean)
        np.testing.assert_array_equal(a.covariance, b.covariance)
    np.testing.assert_array_equal(loaded.knn([0, 1, 1], 3), wall_model.knn([0, 1, 1], 3))
    assert surface_model.load_model(filename, level=1.0).level == 1.0


@pytest.mark.parametrize('content, line', [
    ("GMM 3 1 3\n", 1),
    ("GSM 3 x 3\n", 1),
    ("GSM 3 1 3\n1 0 0 0 1 0 0 1 0\n", 2),
    ("# comment\nGSM 3 2 3\n0.5 0 0 0 1 0 0 1 0 1\n0.5 0 0 1 1 0 0 1 0 oops\n", 4),
])
def test_load_model_errors(tmp_path, content, line):
    filename = tmp_path / 'bad.gsm'
    filename.write_text(content)
    with pytest.raises(ParseError) as info:
        surface_model.load_model(str(filename))
    assert info.value.line == line


def test_load_model_count_mismatch(tmp_path):
    filename = tmp_path / 'short.gsm'
    filename.write_text("GSM 3 2 3\n1 0 0 0 1 0 0 1 0 1\n")
    with pytest.raises(ParseError):
        surface_model.load_model(str(filename))
    filename.write_text("")
    with pytest.raises(ParseError):
        surface_model.load_model(str(filename))


def test_load_empty_model(tmp_path):
    filename = tmp_path / 'empty.gsm'
    filename.write_text("GSM 3 0 3\n")
    model = surface_model.load_model(str(filename))
    assert model.size == 0
    with pytest.raises(EmptyModel):
        model.knn(np.zeros(3), 1)


def test_point_cloud_xyz(tmp_path, rng):
    points = rng.normal(size=(20, 3))
    filename = str(tmp_path / 'cloud.xyz')
    surface_model.save_point_cloud(points, filename)
    np.testing.assert_allclose(surface_model.load_point_cloud(filename), points, rtol=1e-8)

    bad = tmp_path / 'bad.xyz'
    bad.write_text("0 0 0\n1 1\n")
    with pytest.raises(ParseError) as info:
        surface_model.load_point_cloud(str(bad))
    assert info.value.line == 2

    bad.write_text("# nothing here\n")
    with pytest.raises(ParseError):
        surface_model.load_point_cloud(str(bad))


def test_point_cloud_ply(tmp_path):
    filename = tmp_path / 'cloud.ply'
    filename.write_text("\n".join([
        "ply",
        "format ascii 1.0",
        "comment two vertices",
        "element vertex 2",
        "property float nx",
        "property float x",
        "property float y",
        "property float z",
        "element face 0",
        "property list uchar int vertex_indices",
        "end_header",
        "9 1 2 3",
        "9 4 5 6",
    ]) + "\n")
    np.testing.assert_array_equal(surface_model.load_point_cloud(str(filename)), [[1, 2, 3], [4, 5, 6]])

    filename.write_text("ply\nformat binary_little_endian 1.0\nelement vertex 1\nend_header\n")
    with pytest.raises(ParseError):
        surface_model.load_point_cloud(str(filename))
