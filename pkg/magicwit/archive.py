"""
Result archive backed by a bare git repository.

Every report is stored as a JSON blob under a slash separated key such as
``bounds/cglmp-d3/seed-0`` and each put is one commit on master, so reruns
with other settings keep their history.
"""
import json
import logging
import os
import stat
import threading

from dulwich.errors import NotTreeError
from dulwich.object_store import tree_lookup_path
from dulwich.objects import Blob, Tree
from dulwich.repo import Repo

from magicwit.util import InvalidArgument

MASTER = b'refs/heads/master'
IDENTITY = b'magicwit <magicwit@localhost>'
BLOB_MODE = 0o100644

log = logging.getLogger('magicwit.archive')


def create(path):
    if os.path.exists(os.path.join(path, 'HEAD')):
        return Archive(path)
    if not os.path.exists(path):
        os.makedirs(path)
    repo = Repo.init_bare(path)
    tree = Tree()
    repo.object_store.add_object(tree)
    repo.do_commit(tree=tree.id, message=b"Initial version", ref=MASTER, committer=IDENTITY, author=IDENTITY)
    repo.close()
    log.info("created archive at %s", path)
    return Archive(path)


def _split(key):
    parts = key.strip('/').split('/')
    if not key or not all(parts) or any(p in ('.', '..') for p in parts):
        raise InvalidArgument("invalid archive key %r" % key)
    return [p.encode('utf-8') for p in parts]


class Archive(object):

    def __init__(self, path):
        if not os.path.exists(path):
            raise InvalidArgument("archive path does not exist: %s" % path)
        self.path = path
        self.repo = Repo(path)
        self.lock = threading.RLock()

    def close(self):
        self.repo.close()

    def head(self):
        return self.repo.refs[MASTER]

    def _root(self, commit_sha=None):
        return self.repo[commit_sha or self.head()].tree

    def _lookup(self, tree_id, key):
        try:
            mode, sha = tree_lookup_path(self.repo.__getitem__, tree_id, b'/'.join(_split(key)))
        except (KeyError, NotTreeError):
            return None
        return sha if not stat.S_ISDIR(mode) else None

    def _add_blob(self, tree, parts, blob_id):
        new = Tree()
        for entry in tree.items():
            new.add(entry.path, entry.mode, entry.sha)
        name = parts[0]
        if len(parts) == 1:
            new.add(name, BLOB_MODE, blob_id)
        else:
            child = Tree()
            if name in tree:
                mode, sha = tree[name]
                if stat.S_ISDIR(mode):
                    child = self.repo[sha]
            new.add(name, stat.S_IFDIR, self._add_blob(child, parts[1:], blob_id))
        self.repo.object_store.add_object(new)
        return new.id

    def put(self, key, value, message=None):
        """Store value (any JSON document) under key; returns the commit sha."""
        parts = _split(key)
        with self.lock:
            blob = Blob.from_string(json.dumps(value, sort_keys=True, indent=2).encode('utf-8'))
            self.repo.object_store.add_object(blob)
            root = self.repo[self._root()]
            tree_id = self._add_blob(root, parts, blob.id)
            msg = message or "Put %s" % key
            sha = self.repo.do_commit(tree=tree_id, message=msg.encode('utf-8'), ref=MASTER,
                                      committer=IDENTITY, author=IDENTITY)
        log.info("archived %s as %s", key, sha.decode('ascii'))
        return sha.decode('ascii')

    def get(self, key, commit_sha=None):
        if isinstance(commit_sha, str):
            commit_sha = commit_sha.encode('ascii')
        sha = self._lookup(self._root(commit_sha), key)
        if sha is None:
            return None
        return json.loads(self.repo[sha].data.decode('utf-8'))

    def keys(self, prefix=''):
        out = []

        def walk(tree, path):
            for entry in tree.items():
                name = entry.path.decode('utf-8')
                child = '%s/%s' % (path, name) if path else name
                if stat.S_ISDIR(entry.mode):
                    walk(self.repo[entry.sha], child)
                else:
                    out.append(child)

        walk(self.repo[self._root()], '')
        prefix = prefix.strip('/')
        return sorted(k for k in out if not prefix or k == prefix or k.startswith(prefix + '/'))

    def history(self, key):
        """Commits that changed key, newest first, as dicts with sha, message and time."""
        out = []
        for entry in self.repo.get_walker(include=[self.head()]):
            commit = entry.commit
            sha = self._lookup(commit.tree, key)
            if sha is None:
                continue
            parent = self._lookup(self.repo[commit.parents[0]].tree, key) if commit.parents else None
            if sha != parent:
                out.append({
                    'sha': commit.id.decode('ascii'),
                    'message': commit.message.decode('utf-8'),
                    'time': commit.commit_time,
                })
        return out
