from __future__ import annotations

from fastapi import APIRouter

from app.schemas.api import ColorRequest
from app.schemas.quandle import FiniteQuandle
from app.services import braid_service, quandle_service

router = APIRouter()


def _quandle_payload(quandle: FiniteQuandle) -> dict:
    return {"name": quandle.name, "order": quandle.order, "table": [list(row) for row in quandle.table]}


@router.get("/dihedral/{n}")
def dihedral(n: int):
    quandle = quandle_service.dihedral(n)
    report = quandle_service.check_axioms(quandle)
    return {"data": {**_quandle_payload(quandle), "valid": report.valid}}


@router.get("/enumerate/{order}")
def enumerate_quandles(order: int):
    return {"data": [_quandle_payload(quandle) for quandle in quandle_service.enumerate_quandles(order)]}


@router.post("/color")
def color(payload: ColorRequest):
    word = braid_service.parse_braid_text(payload.word, payload.strands)
    panel = quandle_service.parse_panel(payload.panel)
    return {
        "data": {
            "word": braid_service.format_braid(word),
            "colorings": {quandle.name: quandle_service.coloring_count(word, quandle) for quandle in panel},
        }
    }
