# src/utils/logger.py
"""Logging utility shared by every tvcut module"""
import logging
import os
import sys
from datetime import datetime
from typing import Optional

from config.settings import Config


def setup_logger(name: str, level: Optional[int] = None) -> logging.Logger:
    """Set up logger with file and console handlers"""
    if level is None:
        level = getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO)

    # Create logger
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Avoid duplicate handlers
    if logger.handlers:
        return logger

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    if Config.LOG_TO_FILE:
        Config.ensure_directories()
        log_file = os.path.join(
            Config.LOGS_DIR,
            f'tvcut_{datetime.now().strftime("%Y%m%d")}.log'
        )
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    # Console goes to stderr; stdout carries command results
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # Handlers live on named loggers only
    logger.propagate = False

    return logger


def set_level(level: int):
    """Change the level of every logger created through setup_logger"""
    for logger in logging.Logger.manager.loggerDict.values():
        if isinstance(logger, logging.Logger) and logger.handlers:
            logger.setLevel(level)
            for handler in logger.handlers:
                handler.setLevel(level)
