"""
Minimal external solver used to exercise the subprocess bridge.

Reads the flow-rate file of the working directory and writes, for sensor k,
the k-th flow rate (cycling through the servers) as its temperature.

    python echo_solver.py --sensors t01,t02 [--fail] [--sleep S] [--no-output] WORKDIR
"""
import argparse
import os
import sys
import time


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument('workdir')
    parser.add_argument('--sensors', required=True, help='comma separated sensor ids')
    parser.add_argument('--config', default='flow_rates.csv')
    parser.add_argument('--output', default='results.csv')
    parser.add_argument('--fail', action='store_true')
    parser.add_argument('--sleep', type=float, default=0.0)
    parser.add_argument('--no-output', action='store_true')
    parser.add_argument('--garbage', action='store_true', help='write a malformed second line')
    args = parser.parse_args(argv)

    if args.sleep:
        time.sleep(args.sleep)

    if args.fail:
        sys.stderr.write('echo solver asked to fail\n')
        return 2

    if args.no_output:
        return 0

    with open(os.path.join(args.workdir, args.config)) as f:
        flow_rates = [line.split(',')[1].strip() for line in f if line.strip()]

    sensors = args.sensors.split(',')

    with open(os.path.join(args.workdir, args.output), 'w') as f:
        for k, sensor in enumerate(sensors):
            if args.garbage and k == 1:
                f.write('{} hot\n'.format(sensor))
                continue
            f.write('{}, {}\n'.format(sensor, flow_rates[k % len(flow_rates)]))

    return 0


if __name__ == '__main__':
    sys.exit(main())
