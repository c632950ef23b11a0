from vitfreeze.main import main

raise SystemExit(main())
