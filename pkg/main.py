from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from dotenv import load_dotenv

from core.config import settings
from core.logging import configure_logging

load_dotenv()


def create_app() -> FastAPI:
    configure_logging()
    application = FastAPI(
        title="contractum API",
        description="Checks, iterations and claim reports for (alpha,beta)-contractions of multivalued maps",
        version="1.0.0",
    )

    application.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    # Routers are imported lazily to avoid circular deps during app creation
    from routers.corpus import router as corpus_router
    from routers.experiments import router as experiments_router

    application.include_router(experiments_router, prefix="/experiments", tags=["experiments"])
    application.include_router(corpus_router, prefix="/corpus", tags=["corpus"])

    @application.get("/health", tags=["health"])
    async def health():
        return {"status": "ok", "app": settings.app_name, "schema": settings.report_schema}

    return application


app = create_app()


if __name__ == "__main__":
    import uvicorn
    uvicorn.run("main:app", host="127.0.0.1", port=8000, reload=True)
