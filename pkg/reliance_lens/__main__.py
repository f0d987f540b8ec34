from reliance_lens.cli import run

run()
