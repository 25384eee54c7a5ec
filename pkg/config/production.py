ENV = "production"
DEBUG = False
LOG_LEVEL = "INFO"
