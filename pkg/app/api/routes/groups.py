from __future__ import annotations

from fastapi import APIRouter

from app.schemas.api import GroupRequest
from app.services import braid_service, link_group_service

router = APIRouter()


@router.post("/link")
def link_group(payload: GroupRequest):
    word = braid_service.parse_braid_text(payload.word, payload.strands)
    presentation = link_group_service.link_group(word)
    return {
        "data": {
            "generators": presentation.generators,
            "relators": [list(relator) for relator in presentation.relators],
            "homomorphisms": {
                f"S{degree}": link_group_service.count_homomorphisms(presentation, degree)
                for degree in range(2, payload.degree + 1)
            },
        }
    }
