"""Wake-up bounds and schedules for the geometric Freeze-Tag Problem."""

__version__ = "0.1.0"
