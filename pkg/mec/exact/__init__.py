from .rational import *
from .linalg import *
