"""Services exposed through the CLI.

Each service takes an input path and a loaded pipeline config, runs one
ocrkit pipeline and writes its artifacts. The command layer in
`ocrkit_cli.main` turns their errors into exit codes.
"""
