from app.core.config import get_settings

settings = get_settings()

app = "app.main:app"
host = settings.BACKEND_HOST
port = settings.BACKEND_PORT
log_level = "debug" if settings.DEBUG else settings.LOG_LEVEL.lower()
workers = 1 if settings.DEBUG else max(1, settings.APP_WORKERS)
