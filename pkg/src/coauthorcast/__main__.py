from coauthorcast.cli import main

main()
