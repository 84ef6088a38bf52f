import logging
from logging.handlers import RotatingFileHandler


def setup_logging(name: str = "transmutant", level: str = None):
    """
    Setup logging configuration
    """
    from .config import LOG_DIR, get_log_path
    from .config_loader import config

    log_cfg = config.get_logging_config()
    level_name = (level or log_cfg.get("level", "INFO")).upper()
    log_level = getattr(logging, level_name, logging.INFO)

    logger = logging.getLogger(name)
    logger.setLevel(log_level)

    # Child loggers (transmutant.goursat, ...) reach these handlers; the root does not
    logger.propagate = False

    # Clear any existing handlers to prevent duplicates
    logger.handlers.clear()

    formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    # File Handler (Rotating), best effort: read-only homes are common on CI
    if log_cfg.get("file", True):
        try:
            LOG_DIR.mkdir(parents=True, exist_ok=True)
            file_handler = RotatingFileHandler(
                get_log_path(name),
                maxBytes=int(log_cfg.get("max_log_size", 10 * 1024 * 1024)),
                backupCount=int(log_cfg.get("backup_count", 5)),
                encoding="utf-8",
            )
            file_handler.setLevel(log_level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except OSError:
            pass

    # Stream Handler (Console); stderr so CSV/JSON on stdout stay clean
    stream_handler = logging.StreamHandler()
    stream_handler.setLevel(log_level)
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)

    return logger


# Create a default logger instance for convenient import
logger = setup_logging()
