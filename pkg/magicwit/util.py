import logging

HANDLER_NAME = 'magicwit'


class InvalidArgument(ValueError):
    pass


class ResourceLimit(RuntimeError):
    pass


def setup_logging(level=logging.INFO):
    root = logging.getLogger()
    root.setLevel(level)
    for handler in root.handlers:
        if handler.get_name() == HANDLER_NAME:
            handler.setLevel(level)
            return
    handler = logging.StreamHandler()
    handler.set_name(HANDLER_NAME)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))

    # set handler for base logger
    root.addHandler(handler)


def check_budget(count, budget, what):
    if count > budget:
        raise ResourceLimit("%s needs %d items, budget is %d" % (what, count, budget))
    return count
