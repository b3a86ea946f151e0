import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from magicwit import __version__, acceptance, archive, bell, graphs, optimize
from magicwit.util import InvalidArgument, ResourceLimit, setup_logging

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

log = logging.getLogger('magicwit.cli')


def _add_optimizer_args(parser):
    parser.add_argument("--restarts", type=int, default=64, help="""
        random restarts per optimization
        """.strip())
    parser.add_argument("--max-iters", type=int, default=500, help="""
        see-saw sweeps per restart
        """.strip())
    parser.add_argument("--tol", type=float, default=1e-9, help="""
        stop a restart once a sweep improves the value by less than this
        """.strip())
    parser.add_argument("--seed", type=int, default=None, help="""
        random seed; defaults to $MAGICWIT_SEED or 0
        """.strip())
    parser.add_argument("--jobs", type=int, default=1, help="""
        worker processes for restarts and class enumeration
        """.strip())


def _add_output_args(parser):
    parser.add_argument("--output", "-o", default=None, help="""
        write the result here instead of stdout; the run manifest goes next to it
        """.strip())
    parser.add_argument("--archive", default=None, help="""
        git archive directory to commit the report into
        """.strip())


def build_parser():
    parser = argparse.ArgumentParser(prog="magicwit", description="""
        Stabilizer, quantum and local values of Bell inequalities.
        """.strip())
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    parser.add_argument("-v", "--verbose", action="count", default=0, help="""
        log progress to stderr (twice for debug output)
        """.strip())
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("classes", help="list local-Clifford classes of n-vertex graphs over F_d")
    p.add_argument("n", type=int, help="number of vertices")
    p.add_argument("d", type=int, help="prime local dimension")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    p.add_argument("--budget", type=int, default=graphs.DEFAULT_ENUMERATION_BUDGET, help="""
        maximum number of adjacency matrices to enumerate
        """.strip())
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    _add_output_args(p)

    p = sub.add_parser("bounds", help="local, stabilizer and quantum values of one inequality")
    p.add_argument("spec", help="""
        catalog name (%s) or path to an inequality JSON file
        """.strip() % ', '.join(sorted(bell.CATALOG)))
    p.add_argument("--alpha", type=float, default=None, help="tilting parameter for tilted-chsh")
    p.add_argument("--d", type=int, default=None, help="outcome count for cglmp")
    p.add_argument("--dims", default=None, help="""
        comma separated local dimensions the inequality must have
        """.strip())
    p.add_argument("--which", choices=["local", "stab", "quantum", "all"], default="all", help="""
        which value to compute
        """.strip())
    _add_optimizer_args(p)
    _add_output_args(p)

    p = sub.add_parser("scan", help="stabilizer/quantum gap of the tilted CHSH family as CSV")
    p.add_argument("--start", type=float, default=0.0, help="first tilting parameter")
    p.add_argument("--stop", type=float, default=2.0, help="last tilting parameter")
    p.add_argument("--step", type=float, default=0.1, help="grid spacing")
    p.add_argument("--which", choices=["local", "stab", "quantum", "all"], default="all")
    _add_optimizer_args(p)
    _add_output_args(p)

    p = sub.add_parser("heatmap", help="S3+R2 over the generalized W family as CSV")
    p.add_argument("--theta-steps", type=int, default=21, help="grid points for theta in [0, pi]")
    p.add_argument("--phi-steps", type=int, default=21, help="grid points for phi in [0, pi]")
    _add_optimizer_args(p)
    _add_output_args(p)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--quick", action="store_true", help="run the fast subset only")
    p.add_argument("--check", action="append", default=None,
                   choices=[name for name, _ in acceptance.CHECKS], help="run only this check (repeatable)")
    _add_optimizer_args(p)
    return parser


def config_from_args(args):
    return optimize.OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, tol=args.tol,
                                    seed=args.seed, jobs=args.jobs)


def manifest(command, cfg, started):
    return {
        'command': command,
        'config': cfg.to_dict() if cfg is not None else None,
        'version': __version__,
        'wall_time': round(time.time() - started, 3),
    }


def _emit(args, text, man, archive_key=None, report=None):
    if args.output:
        with open(args.output, 'w') as f:
            f.write(text)
        with open(args.output + '.manifest.json', 'w') as f:
            f.write(json.dumps(man, sort_keys=True, indent=2) + '\n')
    else:
        sys.stdout.write(text)
        sys.stderr.write(json.dumps(man, sort_keys=True) + '\n')
    if getattr(args, 'archive', None) and archive_key:
        store = archive.create(args.archive)
        try:
            store.put(archive_key, {'result': report if report is not None else text, 'manifest': man})
        finally:
            store.close()


def _fmt(value, spec='%.10f'):
    return '' if value is None else spec % value


def load_spec(args):
    if args.spec in bell.CATALOG:
        I = bell.catalog(args.spec, alpha=args.alpha, d=args.d)
    elif os.path.exists(args.spec):
        I = bell.load_inequality(args.spec)
    else:
        raise InvalidArgument("%s is neither a catalog inequality nor a file" % args.spec)
    if args.dims:
        try:
            dims = tuple(int(v) for v in args.dims.split(','))
        except ValueError:
            raise InvalidArgument("--dims must be comma separated integers")
        if dims != I.dims:
            raise InvalidArgument("inequality has dims %s, --dims asked for %s" % (I.dims, dims))
    return I


def cmd_classes(args):
    started = time.time()
    catalog = graphs.enumerate_classes(args.n, args.d, args.budget, args.jobs)
    if args.json:
        text = json.dumps(catalog.to_dict(), sort_keys=True, indent=2) + '\n'
    else:
        lines = ['class\torbit_size\tedges']
        for k, (rep, size) in enumerate(catalog):
            edges = ' '.join('%d-%d:%d' % e for e in rep.edges()) or '-'
            lines.append('%d\t%d\t%s' % (k, size, edges))
        text = '\n'.join(lines) + '\n'
    _emit(args, text, manifest('classes', None, started),
          'classes/n%d-d%d' % (args.n, args.d), catalog.to_dict())
    return EXIT_OK


def cmd_bounds(args):
    started = time.time()
    cfg = config_from_args(args)
    I = load_spec(args)
    which = ('local', 'stab', 'quantum') if args.which == 'all' else (args.which,)
    result = {'inequality': I.name, 'dims': list(I.dims), 'settings': list(I.settings)}
    if 'local' in which:
        result['local'] = bell.local_bound(I, cfg.strategy_budget)
    if 'stab' in which:
        report = optimize.stabilizer_value(I, cfg)
        result['stabilizer'] = report.value
        result['stabilizer_class'] = report.best_class.to_dict()
        result['stabilizer_converged'] = report.converged
    if 'quantum' in which:
        report = optimize.quantum_value(I, cfg)
        result['quantum'] = report.value
        result['quantum_converged'] = report.converged
        result['quantum_measurements'] = report.measurements.to_dict()
    if 'stabilizer' in result and 'quantum' in result:
        result['gap'] = result['quantum'] - result['stabilizer']
    text = json.dumps(result, sort_keys=True, indent=2) + '\n'
    _emit(args, text, manifest('bounds', cfg, started),
          'bounds/%s/seed-%d' % (I.name or 'inequality', cfg.seed), result)
    return EXIT_OK


def scan_params(start, stop, step):
    if step <= 0 or stop < start:
        raise InvalidArgument("scan range needs start <= stop and a positive step")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 10) for k in range(count)]


def cmd_scan(args):
    started = time.time()
    cfg = config_from_args(args)
    params = scan_params(args.start, args.stop, args.step)
    which = ('local', 'stab', 'quantum') if args.which == 'all' else (args.which,)
    rows = optimize.gap_scan(lambda a: bell.tilted_chsh(a, closed=True), params, cfg, which)
    lines = ['param,local,stab,quantum,gap']
    for row in rows:
        lines.append(','.join([_fmt(row.param, '%.4f'), _fmt(row.local), _fmt(row.stab),
                               _fmt(row.quantum), _fmt(row.gap)]))
    text = '\n'.join(lines) + '\n'
    _emit(args, text, manifest('scan', cfg, started), 'scan/tilted-chsh/seed-%d' % cfg.seed)
    return EXIT_OK


def cmd_heatmap(args):
    started = time.time()
    if args.theta_steps < 2 or args.phi_steps < 2:
        raise InvalidArgument("grid sizes must be at least 2")
    cfg = config_from_args(args)
    heat = optimize.w_heatmap(np.linspace(0, np.pi, args.theta_steps), np.linspace(0, np.pi, args.phi_steps), cfg)
    lines = ['theta,phi,value']
    for a, theta in enumerate(heat.thetas):
        for b, phi in enumerate(heat.phis):
            lines.append('%.6f,%.6f,%.10f' % (theta / np.pi, phi / np.pi, heat.values[a, b]))
    text = '\n'.join(lines) + '\n'
    _emit(args, text, manifest('heatmap', cfg, started), 'heatmap/w-state/seed-%d' % cfg.seed,
          {'csv': text, 'best': heat.best})
    return EXIT_OK


def cmd_verify(args):
    cfg = config_from_args(args)
    results = acceptance.run_checks(cfg, quick=args.quick, names=args.check)
    failed = [r for r in results if not r.passed]
    for r in results:
        sys.stdout.write('%-18s %-6s %8.2fs\n' % (r.name, 'ok' if r.passed else 'FAILED', r.seconds))
        for failure in r.failures:
            sys.stdout.write('    %s\n' % failure)
    if failed:
        sys.stdout.write('failed: %s\n' % ', '.join(r.name for r in failed))
        return EXIT_VERIFY_FAILED
    return EXIT_OK


COMMANDS = {
    'classes': cmd_classes,
    'bounds': cmd_bounds,
    'scan': cmd_scan,
    'heatmap': cmd_heatmap,
    'verify': cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose > 1:
        level = logging.DEBUG
    setup_logging(level)
    try:
        return COMMANDS[args.command](args)
    except InvalidArgument as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (parser.prog, e))
        return EXIT_USAGE
    except ResourceLimit as e:
        sys.stderr.write("%s: resource limit: %s\n" % (parser.prog, e))
        return EXIT_RESOURCE


if __name__ == '__main__':
    sys.exit(main())
