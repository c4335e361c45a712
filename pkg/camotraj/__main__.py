"""Allow ``python -m camotraj``."""

from camotraj.cli import main

raise SystemExit(main())
