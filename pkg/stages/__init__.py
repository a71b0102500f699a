"""Pipeline stages: classify, assess, enhance and calibrate."""
