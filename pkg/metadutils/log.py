import logging
logging.basicConfig(format='[%(levelname)s] %(message)s')
logger = logging.getLogger('metadutils')

def set_quiet():
    logger.setLevel(logging.ERROR)

def set_verbose():
    logger.setLevel(logging.DEBUG)

def set_default():
    logger.setLevel(logging.INFO)

def configure(verbose=False, quiet=False):
    # quiet wins over verbose
    if quiet:
        set_quiet()
    elif verbose:
        set_verbose()
    else:
        set_default()

set_default()

info = logger.info
debug = logger.debug
warning = logger.warning
error = logger.error
