import sys
from qcopies.cli import main
sys.exit(main())
