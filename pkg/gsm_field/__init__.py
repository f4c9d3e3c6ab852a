from .errors import GSMError
from .geometry import Ellipsoid, isocontour_ellipsoid, make_ellipsoid, random_ellipsoid, robot_ellipsoid
from .distance import pair_collides, pair_distance, surface_distance, surface_gradient
from .probability import UncertainCenter, pair_collision_probability, surface_collision_probability
from .surface_model import SurfaceModel, fit_gmm, load_model, save_model
from .pipeline import Pipeline
