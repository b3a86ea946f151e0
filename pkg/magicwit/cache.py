"""
In-process memo of local-Clifford class catalogs. Enumeration at a given
(n, d) is deterministic, so each catalog is built once and shared by every
inequality and dimension cluster that needs it.
"""
import logging
import time

from dulwich.lru_cache import LRUCache

log = logging.getLogger('magicwit.cache')


class CatalogCache(LRUCache):
    """LRU of OrbitCatalog objects keyed by (n, d), with hit/miss counters."""

    def __init__(self, max_catalogs=64, enabled=True):
        LRUCache.__init__(self, max_cache=max_catalogs, after_cleanup_count=max_catalogs)
        self.enabled = enabled
        self.reset_stats()

    def reset_stats(self):
        self.hits = 0
        self.misses = 0
        self.build_seconds = 0.0

    def stats(self):
        return {
            'hits': self.hits,
            'misses': self.misses,
            'catalogs': len(self),
            'build_seconds': round(self.build_seconds, 3),
        }

    def clear(self):
        LRUCache.clear(self)
        self.reset_stats()

    def lookup(self, n, d, build):
        """Catalog for (n, d); build(n, d) runs only on a miss."""
        key = (int(n), int(d))
        if self.enabled:
            found = self.get(key)
            if found is not None:
                self.hits += 1
                return found
        self.misses += 1
        started = time.time()
        catalog = build(*key)
        self.build_seconds += time.time() - started
        if self.enabled:
            self.add(key, catalog)
            log.debug("cached class catalog n=%d d=%d (%d catalogs held)", key[0], key[1], len(self))
        return catalog


catalogs = CatalogCache()
