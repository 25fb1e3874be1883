from .enumeration import *
from .minimization import *
from .evaluation import *
from .discrete import *
from .circle import *

# Flag to indicate all commands are loaded
all_commands = True
