import sys

from markov_machines.cli.main import main

sys.exit(main())
