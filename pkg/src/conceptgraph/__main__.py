from conceptgraph.cli import entry

entry()
