"""
Development tasks.

    invoke test
    invoke acceptance
    invoke generate --out-dir hall --seed 0
    invoke calibrate --hall hall --method knowledge
    invoke clean
"""
from invoke import task

CLEAN_PATTERNS = ('hall', 'report', 'study', 'solved.csv', 'build', 'dist', '*.egg-info')


@task
def test(c, verbose=False):
    c.run('python -m unittest discover -s hallcal -t .{}'.format(' -v' if verbose else ''), pty=True)


@task
def acceptance(c):
    c.run('python -m unittest hallcal.calibration.tests.test_acceptance -v',
          env={'HALLCAL_ACCEPTANCE': '1'}, pty=True)


@task
def generate(c, out_dir='hall', seed=0, identifiable=False):
    c.run('python -m hallcal.cli.main generate --out-dir {} --seed {}{}'.format(
        out_dir, seed, ' --identifiable' if identifiable else ''))


@task
def calibrate(c, hall='hall', method='knowledge', out_dir='report', config=None, iters=None):
    command = ('python -m hallcal.cli.main calibrate --layout {0}/layout.yaml --state {0}/state.yaml '
               '--scenario {0}/scenario.yaml --measurements {0}/measurements.csv --method {1} --out-dir {2}'
               .format(hall, method, out_dir))

    if config:
        command += ' --config {}'.format(config)

    if iters:
        command += ' --iters {}'.format(iters)

    c.run(command)


@task
def clean(c):
    c.run('rm -rf {}'.format(' '.join(CLEAN_PATTERNS)))
    c.run('find . -path ./examples -prune -o -name __pycache__ -type d -exec rm -rf {} +')
