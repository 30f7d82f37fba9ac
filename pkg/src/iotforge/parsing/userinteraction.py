"""Parser for the user-interaction language (``*.ui.mydsl``)."""

from __future__ import annotations

from ..model import InteractorDecl, RecordTypeDecl, UserInteractionSpec
from .base import Parser, _Bail
from .domain import RecordParserMixin


class UserInteractionParser(RecordParserMixin, Parser):
    def parse(self) -> UserInteractionSpec:
        self.records: list[RecordTypeDecl] = []
        self.interactors: list[InteractorDecl] = []
        try:
            self.expect("userInteractions")
            self.block(self.section)
            self.finish()
        except _Bail:
            pass
        spec = UserInteractionSpec(tuple(self.records), tuple(self.interactors))
        self.check_unique_records(spec.records)
        seen = set()
        for i in spec.interactors:
            if i.name in seen:
                self.report(i.span, "DuplicateInteractor", f"interactor {i.name!r} declared twice")
            seen.add(i.name)
        return spec

    def section(self):
        if self.accept("structs"):
            self.records_block(self.records)
        elif self.accept("resources"):
            self.block(self.interactor)
        else:
            self.error("expected structs or resources")

    def interactor(self):
        name = self.ident("interactor name")
        payloads = []

        def stmt():
            self.expect("notify")
            payloads.append(self.generate_clause())
            self.expect(";")

        self.block(stmt)
        if len(payloads) != 1:
            self.report(name.span, "InteractorShape",
                        f"interactor {name.text!r} must declare exactly one notify payload")
            return
        self.interactors.append(InteractorDecl(name.text, payloads[0], "Notify", name.span))


def parse_userinteraction(text: str, file: str = "app.ui.mydsl"):
    """Parse user-interaction text. Returns ``(UserInteractionSpec | None, diagnostics)``."""
    p = UserInteractionParser(text, file)
    spec = p.parse()
    return (None if p.failed else spec), p.diagnostics
