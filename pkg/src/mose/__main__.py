from mose.cli import main

raise SystemExit(main())
