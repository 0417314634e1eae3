"""
Main FastAPI application for the Nielsen Orbit Lab.
"""

from contextlib import asynccontextmanager

from fastapi import FastAPI, Request, status
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from app.config import get_settings
from app.exceptions import LabError
from app.models.system_models import ErrorResponse, HealthResponse
from app.routes import lab_router
from app.utils.logger import configure_logging, get_logger

settings = get_settings()
configure_logging(settings.log_level, settings.log_format)

logger = get_logger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Application lifespan manager for startup and shutdown events.

    Args:
        app: FastAPI application instance
    """
    logger.info(
        "Configuration loaded",
        app_name=settings.app_name,
        version=settings.app_version,
        environment=settings.environment,
        field=settings.field_kind,
        p=settings.prime,
        precision=settings.precision,
    )
    yield
    logger.info("Shutting down", app_name=settings.app_name)


def create_app() -> FastAPI:
    """
    Create and configure FastAPI application.

    Returns:
        Configured FastAPI application instance
    """
    app = FastAPI(
        title=settings.app_name,
        version=settings.app_version,
        description="Local-field matrices, Bruhat-Tits trees, Nielsen moves and density certificates",
        docs_url="/docs" if settings.environment == "development" else None,
        redoc_url="/redoc" if settings.environment == "development" else None,
        openapi_url="/openapi.json" if settings.environment == "development" else None,
        lifespan=lifespan,
    )

    app.include_router(lab_router)

    @app.get("/", tags=["Root"])
    async def root():
        """Root endpoint with API information."""
        return {
            "message": f"{settings.app_name} API",
            "version": settings.app_version,
            "environment": settings.environment,
            "docs_url": "/docs" if settings.environment == "development" else None,
            "health_check": "/health",
        }

    @app.get("/health", tags=["Health"], response_model=HealthResponse)
    async def health() -> HealthResponse:
        """Simple health check endpoint."""
        return HealthResponse(status="healthy", service="nielsen-orbit-lab", version=settings.app_version)

    @app.exception_handler(LabError)
    async def lab_exception_handler(request: Request, exc: LabError):
        """Map lab errors to their status codes."""
        logger.warning(
            "Lab error",
            error=type(exc).__name__,
            status_code=exc.status_code,
            path=request.url.path,
            method=request.method,
        )
        body = exc.to_dict()
        return JSONResponse(
            status_code=exc.status_code,
            content=ErrorResponse(error=body["error"], message=body["message"], details=body["details"]).model_dump(
                mode="json"
            ),
        )

    @app.exception_handler(RequestValidationError)
    async def validation_exception_handler(request: Request, exc: RequestValidationError):
        """Handle request validation errors."""
        logger.warning("Validation error", errors=len(exc.errors()), path=request.url.path, method=request.method)
        errors = [
            {"loc": [str(part) for part in e.get("loc", ())], "msg": str(e.get("msg", ""))} for e in exc.errors()
        ]
        return JSONResponse(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            content=ErrorResponse(
                error="Validation Error",
                message="Request validation failed",
                details={"errors": errors},
            ).model_dump(mode="json"),
        )

    @app.exception_handler(Exception)
    async def general_exception_handler(request: Request, exc: Exception):
        """Handle general exceptions."""
        logger.error("Unhandled exception", error=str(exc), path=request.url.path, method=request.method, exc_info=True)
        return JSONResponse(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            content=ErrorResponse(error="Internal Server Error", message="An unexpected error occurred").model_dump(
                mode="json"
            ),
        )

    return app


# Create app instance
app = create_app()
