import sys as SYS

from src.spherical_hmc import logging



class CustomException(Exception):

    def __init__(self, message: str | Exception, sys=SYS):

        self.message = message

        super().__init__(message)

        _, _, exc_traceback = sys.exc_info()

        if exc_traceback is not None:
            while exc_traceback.tb_next is not None:
                exc_traceback = exc_traceback.tb_next
            self.path = exc_traceback.tb_frame.f_code.co_filename
            self.line = exc_traceback.tb_lineno
        else:
            # raised directly, not while handling another exception
            frame = sys._getframe(1)
            while frame.f_back is not None and frame.f_code.co_name == "__init__":
                frame = frame.f_back
            self.path = frame.f_code.co_filename
            self.line = frame.f_lineno

    def __str__(self):

        return f"{type(self).__name__}: {self.message} on line: {self.line} of {self.path}"


class ConstraintViolationError(CustomException):
    """A point lies outside the unit ball it is required to be in."""


class DomainViolationError(ConstraintViolationError):
    """A point lies outside its ConstraintDomain."""


class ModelConstructionError(CustomException):
    """A target model could not be built from its inputs."""


class DataIngestionError(CustomException):
    """A data file is missing or malformed."""


class ConfigValidationError(CustomException):
    """An experiment configuration failed validation."""


class SamplingError(CustomException):
    """A chain could not be advanced."""


class DiagnosticsError(CustomException):
    """A diagnostic was asked of data it cannot summarise."""


__all__ = [
    "CustomException",
    "ConstraintViolationError",
    "DomainViolationError",
    "ModelConstructionError",
    "DataIngestionError",
    "ConfigValidationError",
    "SamplingError",
    "DiagnosticsError",
]


if __name__=="__main__":

    try:

        1/0

    except Exception as e:

        logging.exception(e)

        raise CustomException(e, SYS)
