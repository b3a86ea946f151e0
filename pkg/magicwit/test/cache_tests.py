from nose import tools as nt

from magicwit import graphs
from magicwit.cache import CatalogCache


def _counting_build(calls):
    def build(n, d):
        calls.append((n, d))
        return graphs.enumerate_classes(n, d)
    return build


def test_lookup_builds_once():
    calls = []
    cache = CatalogCache()
    first = cache.lookup(3, 2, _counting_build(calls))
    nt.assert_equal(len(first), 5)
    nt.assert_true(cache.lookup(3, 2, _counting_build(calls)) is first)
    cache.lookup(2, 3, _counting_build(calls))
    nt.assert_equal(calls, [(3, 2), (2, 3)])
    stats = cache.stats()
    nt.assert_equal((stats['hits'], stats['misses'], stats['catalogs']), (1, 2, 2))
    cache.clear()
    nt.assert_equal(cache.stats()['catalogs'], 0)
    nt.assert_equal(cache.stats()['misses'], 0)


def test_least_recent_catalog_is_evicted():
    calls = []
    cache = CatalogCache(max_catalogs=2)
    for n, d in ((2, 2), (3, 2), (2, 2), (2, 3)):
        cache.lookup(n, d, _counting_build(calls))
    nt.assert_equal(cache.stats()['catalogs'], 2)
    cache.lookup(2, 2, _counting_build(calls))
    cache.lookup(3, 2, _counting_build(calls))
    nt.assert_equal(calls, [(2, 2), (3, 2), (2, 3), (3, 2)])


def test_disabled_cache_always_builds():
    calls = []
    cache = CatalogCache(enabled=False)
    for _ in range(3):
        cache.lookup(2, 2, _counting_build(calls))
    nt.assert_equal(len(calls), 3)
    nt.assert_equal(cache.stats()['catalogs'], 0)
