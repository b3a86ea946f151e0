import io
import json
import os
import sys

from nose import tools as nt

from magicwit import acceptance, archive, bell, cli

from magicwit.test.util import remove, temp_dir

work = None


def _setup():
    global work
    work = temp_dir()


def _teardown():
    remove(work)


setup_function = lambda f=None: _setup()
teardown_function = lambda f=None: _teardown()


def _run(*argv):
    out = os.path.join(work, 'out.txt')
    code = cli.main(list(argv) + ['--output', out])
    text = open(out).read() if os.path.exists(out) else None
    return code, text, out


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_classes_table_and_manifest():
    code, text, out = _run('classes', '3', '2')
    nt.assert_equal(code, cli.EXIT_OK)
    lines = text.strip().split('\n')
    nt.assert_equal(lines[0], 'class\torbit_size\tedges')
    nt.assert_equal(len(lines), 6)
    nt.assert_equal(lines[1], '0\t1\t-')
    man = json.load(open(out + '.manifest.json'))
    nt.assert_equal(man['command'], 'classes')
    nt.assert_true('wall_time' in man)
    nt.assert_false('wall_time' in text)


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_classes_json():
    code, text, _ = _run('classes', '2', '3', '--json')
    nt.assert_equal(code, cli.EXIT_OK)
    doc = json.loads(text)
    nt.assert_equal((doc['n'], doc['d']), (2, 3))
    nt.assert_equal([c['orbit_size'] for c in doc['classes']], [1, 2])


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_classes_budget_exceeded():
    code, text, _ = _run('classes', '4', '3', '--budget', '100')
    nt.assert_equal(code, cli.EXIT_RESOURCE)
    nt.assert_equal(text, None)


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_bounds_local_only():
    code, text, _ = _run('bounds', 'svetlichny-r2', '--which', 'local')
    nt.assert_equal(code, cli.EXIT_OK)
    doc = json.loads(text)
    nt.assert_true(abs(doc['local'] - 6) < 1e-12)
    nt.assert_equal(doc['dims'], [2, 2, 2])
    nt.assert_false('stabilizer' in doc)


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_bounds_stabilizer():
    code, text, _ = _run('bounds', 'tilted-chsh', '--alpha', '0.5', '--which', 'stab',
                         '--restarts', '8', '--tol', '1e-12', '--seed', '3')
    nt.assert_equal(code, cli.EXIT_OK)
    doc = json.loads(text)
    nt.assert_true(abs(doc['stabilizer'] - 2 * 2 ** 0.5) < 1e-5)
    nt.assert_equal(doc['stabilizer_class']['dims'], [2, 2])


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_bounds_from_file():
    path = os.path.join(work, 'chsh.json')
    with open(path, 'w') as f:
        f.write(bell.inequality_to_json(bell.chsh()))
    code, text, _ = _run('bounds', path, '--which', 'local', '--dims', '2,2')
    nt.assert_equal(code, cli.EXIT_OK)
    nt.assert_true(abs(json.loads(text)['local'] - 2) < 1e-12)
    code, _, _ = _run('bounds', path, '--which', 'local', '--dims', '3,3')
    nt.assert_equal(code, cli.EXIT_USAGE)


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_bounds_bad_input():
    path = os.path.join(work, 'broken.json')
    with open(path, 'w') as f:
        f.write('{"dims": [2, 2],')
    nt.assert_equal(_run('bounds', path)[0], cli.EXIT_USAGE)
    nt.assert_equal(_run('bounds', 'no-such-inequality')[0], cli.EXIT_USAGE)
    nt.assert_equal(_run('bounds', 'cglmp', '--d', '4', '--which', 'local')[0], cli.EXIT_USAGE)
    nt.assert_equal(_run('bounds', 'chsh', '--restarts', '0')[0], cli.EXIT_USAGE)


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_scan_local_column():
    code, text, _ = _run('scan', '--start', '0', '--stop', '0.2', '--step', '0.1', '--which', 'local')
    nt.assert_equal(code, cli.EXIT_OK)
    lines = text.strip().split('\n')
    nt.assert_equal(lines[0], 'param,local,stab,quantum,gap')
    nt.assert_equal(lines[1:], ['0.0000,2.0000000000,,,', '0.1000,2.1000000000,,,', '0.2000,2.2000000000,,,'])
    nt.assert_equal(_run('scan', '--step', '0')[0], cli.EXIT_USAGE)


def test_scan_params():
    nt.assert_equal(len(cli.scan_params(0, 2, 0.1)), 21)
    nt.assert_equal(cli.scan_params(0, 2, 0.1)[-1], 2.0)
    nt.assert_equal(cli.scan_params(1, 1, 0.5), [1.0])


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_heatmap_grid_size():
    nt.assert_equal(_run('heatmap', '--theta-steps', '1')[0], cli.EXIT_USAGE)


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_archive_option():
    store_path = os.path.join(work, 'archive.git')
    code = cli.main(['bounds', 'chsh', '--which', 'local', '--seed', '0', '--archive', store_path,
                     '--output', os.path.join(work, 'chsh.json')])
    nt.assert_equal(code, cli.EXIT_OK)
    store = archive.Archive(store_path)
    try:
        nt.assert_equal(store.keys(), ['bounds/chsh/seed-0'])
        doc = store.get('bounds/chsh/seed-0')
        nt.assert_true(abs(doc['result']['local'] - 2) < 1e-12)
        nt.assert_equal(doc['manifest']['command'], 'bounds')
    finally:
        store.close()


def test_verify_single_check():
    nt.assert_equal(cli.main(['verify', '--check', 'orbit-counts']), cli.EXIT_OK)


def test_no_command():
    nt.assert_equal(cli.main([]), cli.EXIT_USAGE)
    nt.assert_raises(SystemExit, cli.main, ['classes'])


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_unreadable_spec_files():
    binary = os.path.join(work, 'binary.json')
    with open(binary, 'wb') as f:
        f.write(b'\xff\xfe\x00{')
    nt.assert_equal(_run('bounds', binary, '--which', 'local')[0], cli.EXIT_USAGE)
    folder = os.path.join(work, 'folder')
    os.mkdir(folder)
    nt.assert_equal(_run('bounds', folder, '--which', 'local')[0], cli.EXIT_USAGE)


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_scan_output_independent_of_jobs():
    argv = ['scan', '--start', '0', '--stop', '0.5', '--step', '0.5', '--restarts', '4', '--seed', '1']
    code, serial, _ = _run(*(argv + ['--jobs', '1']))
    nt.assert_equal(code, cli.EXIT_OK)
    code, pooled, _ = _run(*(argv + ['--jobs', '8']))
    nt.assert_equal(code, cli.EXIT_OK)
    nt.assert_equal(serial, pooled)
    nt.assert_equal(len(serial.strip().split('\n')), 3)


@nt.with_setup(setup=_setup, teardown=_teardown)
def test_heatmap_csv():
    code, text, _ = _run('heatmap', '--theta-steps', '2', '--phi-steps', '2', '--restarts', '2')
    nt.assert_equal(code, cli.EXIT_OK)
    lines = text.strip().split('\n')
    nt.assert_equal(lines[0], 'theta,phi,value')
    nt.assert_equal(len(lines), 5)
    cells = [line.split(',')[:2] for line in lines[1:]]
    nt.assert_equal(cells, [['0.000000', '0.000000'], ['0.000000', '1.000000'],
                            ['1.000000', '0.000000'], ['1.000000', '1.000000']])
    nt.assert_true(all(float(line.split(',')[2]) <= 6 + 1e-6 for line in lines[1:]))


def test_verify_reports_failed_checks():
    saved = list(acceptance.CHECKS)
    stdout = sys.stdout
    acceptance.CHECKS.append(('always-fails', lambda cfg, quick: ['value out of range']))
    sys.stdout = io.StringIO()
    try:
        code = cli.main(['verify', '--check', 'orbit-counts', '--check', 'always-fails'])
        out = sys.stdout.getvalue()
    finally:
        sys.stdout = stdout
        acceptance.CHECKS[:] = saved
    nt.assert_equal(code, cli.EXIT_VERIFY_FAILED)
    nt.assert_true('value out of range' in out)
    nt.assert_true(out.strip().endswith('failed: always-fails'))
