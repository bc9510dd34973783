"""
Logging utilities for roomloc.
"""
import logging
from pathlib import Path


def setup_logging(config=None, log_to_file=None):
    """
    Set up logging with the specified configuration.

    Args:
        config (dict, optional): Configuration with logging settings
        log_to_file (bool, optional): Force file logging on or off; by default
            a file handler is added when `logging.file` is set

    Returns:
        logging.Logger: Configured logger instance
    """
    config = config or {}
    log_level = config.get('logging', {}).get('level', 'INFO')
    log_file = config.get('logging', {}).get('file')

    # Convert string log level to actual level
    numeric_level = getattr(logging, str(log_level).upper(), None)
    if not isinstance(numeric_level, int):
        numeric_level = logging.INFO

    if log_to_file is None:
        log_to_file = bool(log_file)

    handlers = [logging.StreamHandler()]
    if log_to_file:
        log_path = Path(log_file or "roomloc.log")
        if not log_path.is_absolute():
            log_dir = Path(__file__).parent.parent.parent / "logs"
            log_dir.mkdir(exist_ok=True)
            log_path = log_dir / log_path
        handlers.append(logging.FileHandler(log_path))

    # Configure root logger
    logging.basicConfig(
        level=numeric_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )

    return logging.getLogger("roomloc")
