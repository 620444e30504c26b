from .app import ApiSession, create_app

__all__ = ["ApiSession", "create_app"]
