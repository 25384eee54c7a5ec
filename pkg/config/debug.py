ENV = "development"
DEBUG = True
LOG_LEVEL = "DEBUG"
WORKERS = 1
