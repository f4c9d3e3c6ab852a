"""
Colormaps, PPM images, isocontours and figures of field slices.
"""
import numpy as np
from matplotlib.colors import LinearSegmentedColormap
from matplotlib.figure import Figure

from .util import mkdir_p

DISTANCE_STOPS = ('#0000ff', '#00ffff', '#ffff00', '#ff0000')
PROBABILITY_STOPS = ('#000000', '#ff0000')
INVALID_COLOR = (0x80, 0x80, 0x80)
LUT_SIZE = 256

DISTANCE_CMAP = LinearSegmentedColormap.from_list('distance', DISTANCE_STOPS, N=LUT_SIZE)
PROBABILITY_CMAP = LinearSegmentedColormap.from_list('probability', PROBABILITY_STOPS, N=LUT_SIZE)


def lookup_table(cmap):
    """
    Get the 8-bit RGB lookup table of a colormap.

    Parameters
    ----------
    cmap : Colormap
        colormap with `LUT_SIZE` entries
    """
    return np.round(cmap(np.linspace(0, 1, LUT_SIZE))[:, :3] * 255).astype(np.uint8)


def to_rgb(values, cmap, vmin=None, vmax=None):
    """
    Map a two-dimensional array to an RGB image; non-finite values are drawn gray.

    Parameters
    ----------
    values : np.ndarray
        values indexed by `[row, column]` with row zero at the bottom of the image
    cmap : Colormap
        colormap
    vmin, vmax : float, optional
        value range mapped onto the colormap (defaults to the finite range of `values`)
    """
    values = np.asarray(values, dtype=float)
    finite = np.isfinite(values)
    if vmin is None:
        vmin = np.min(values[finite]) if finite.any() else 0.0
    if vmax is None:
        vmax = np.max(values[finite]) if finite.any() else 1.0
    scale = vmax - vmin if vmax > vmin else 1.0
    index = np.clip(np.round((np.where(finite, values, vmin) - vmin) / scale * (LUT_SIZE - 1)), 0, LUT_SIZE - 1)
    rgb = lookup_table(cmap)[index.astype(int)]
    rgb[~finite] = INVALID_COLOR
    return np.flipud(rgb)


def write_ppm(filename, rgb):
    """
    Write an 8-bit RGB image as a binary PPM (P6) file.
    """
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    height, width, _ = rgb.shape
    mkdir_p(filename)
    with open(filename, 'wb') as fp:
        fp.write("P6\n{} {}\n255\n".format(width, height).encode('ascii'))
        fp.write(rgb.tobytes())


def read_ppm(filename):
    """
    Read a binary PPM (P6) file written by `write_ppm`.
    """
    with open(filename, 'rb') as fp:
        data = fp.read()
    magic, size, maxval, pixels = data.split(b"\n", 3)
    width, height = size.split()
    if magic != b"P6" or int(maxval) != 255:
        raise ValueError("'{}' is not an 8-bit binary PPM file".format(filename))
    width, height = int(width), int(height)
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3)


def isocontour_polylines(values, points, level):
    """
    Extract the polylines along which a sampled field crosses `level`.

    Parameters
    ----------
    values : np.ndarray
        field values indexed by `[i, j]`
    points : np.ndarray
        positions of the cells indexed by `[i, j]` with the spatial dimension last
    level : float
        isocontour level

    Returns
    -------
    polylines : list of np.ndarray
        vertices of each polyline in world coordinates
    """
    values = np.ma.masked_invalid(values)
    if min(values.shape) < 2 or values.count() == 0 or not values.min() < level < values.max():
        return []
    ax = Figure().subplots()
    contours = ax.contour(np.arange(values.shape[1]), np.arange(values.shape[0]), values, levels=[level])
    origin = points[0, 0]
    step_j = points[0, 1] - origin
    step_i = points[1, 0] - origin
    return [origin + segment[:, :1] * step_j + segment[:, 1:] * step_i
            for segment in contours.allsegs[0] if len(segment)]


def field_plot(values, extent, cmap, label=None, vmin=None, vmax=None):
    """
    Plot a field slice as a heatmap.

    Parameters
    ----------
    values : np.ndarray
        values indexed by `[i, j]`
    extent : tuple
        `(extent_u, extent_v)` of the slice (meters)
    cmap : Colormap
        colormap
    label : str, optional
        colorbar label

    Returns
    -------
    fig : Figure
    ax : Axes
    """
    fig = Figure()
    ax = fig.subplots()
    eu, ev = extent
    image = ax.imshow(np.ma.masked_invalid(values), origin='lower', extent=(-eu / 2, eu / 2, -ev / 2, ev / 2),
                      cmap=cmap, vmin=vmin, vmax=vmax)
    fig.colorbar(image, ax=ax, label=label)
    ax.set_xlabel('u (m)')
    ax.set_ylabel('v (m)')
    return fig, ax


def savefigs(fig, basename, *formats, **kwargs):
    """
    Save a figure in multiple formats.

    Parameters
    ----------
    fig : Figure
    basename : str
        filename without extension
    formats : list
        extensions

    Returns
    -------
    filenames : list
        names of the files written
    """
    mkdir_p(basename)
    filenames = []
    for format in formats:
        if not format.startswith('.'):
            format = '.' + format
        fig.savefig(basename + format, **kwargs)
        filenames.append(basename + format)
    return filenames
