from .exceptions import *
from .operators import *
from .hamiltonians import *
from .decoupling import *
from .scenario import *
from .evolution import *
from .magnus import *
from .bounds import *
from .experiments import *
from .suites import *
