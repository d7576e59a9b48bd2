from __future__ import absolute_import, unicode_literals


class MetadError(Exception):
    pass

class DomainError(MetadError, ValueError):
    """A value outside the domain of an SDT quantity."""
    pass

class CountsError(MetadError, ValueError):
    pass

class ParseError(MetadError):
    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        prefix = ''
        if path is not None:
            prefix = '%s:' % path
        if lineno is not None:
            prefix += '%s:' % lineno
        if prefix:
            message = '%s %s' % (prefix, message)
        super(ParseError, self).__init__(message)

class DatasetError(ParseError):
    pass

class FitError(MetadError):
    pass

class BootstrapError(MetadError):
    pass

class SimulationError(MetadError):
    pass

class TemplateError(MetadError):
    pass

class CredentialsError(MetadError):
    pass

class InvalidRateError(MetadError):
    pass

class TallyError(MetadError):
    pass

class ConfigError(MetadError):
    pass

class ReportError(MetadError):
    pass
