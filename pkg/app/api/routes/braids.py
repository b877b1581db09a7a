from __future__ import annotations

from fastapi import APIRouter

from app.schemas.api import CloseRequest, ConjugacyRequest, PairRequest, WordRequest
from app.services import braid_service, closure_service, garside_service

router = APIRouter()


@router.post("/normalize")
def normalize(payload: WordRequest):
    word = braid_service.parse_braid_text(payload.word, payload.strands)
    nf = garside_service.left_normal_form(word)
    return {
        "data": {
            "word": braid_service.format_braid(word),
            "canonical": braid_service.format_braid(garside_service.word_from_normal_form(nf)),
            "infimum": nf.infimum,
            "supremum": nf.supremum,
            "factors": [factor.cycle_notation() for factor in nf.factors],
        }
    }


@router.post("/equal")
def equal(payload: PairRequest):
    left = braid_service.parse_braid_text(payload.left, payload.strands)
    right = braid_service.parse_braid_text(payload.right, payload.strands)
    return {"data": {"equal": garside_service.words_equal(left, right)}}


@router.post("/conjugate")
def conjugate(payload: ConjugacyRequest):
    left = braid_service.parse_braid_text(payload.left, payload.strands)
    right = braid_service.parse_braid_text(payload.right, payload.strands)
    result = garside_service.conjugate_test(left, right, budget=payload.budget)
    return {
        "data": {
            "verdict": result.verdict,
            "witness": braid_service.format_braid(result.witness) if result.witness is not None else None,
            "certificate": result.certificate,
            "details": result.details,
        }
    }


@router.post("/close")
def close(payload: CloseRequest):
    word = closure_service.parse_closure_input(payload.word, payload.ambient, payload.strands)
    link = closure_service.close_in(word)
    data = link.model_dump(mode="json")
    data["essential"] = None if link.ambient == "sphere3" else closure_service.is_essential(link)
    data["text"] = closure_service.format_link(link)
    return {"data": data}
