from .logger import logging

