"""Member-level segmentation and signature extraction for Java sources.

The parser is structural rather than grammatical: a lexer that understands
comments, string/char literals and text blocks, a bracket matcher, and a
recognizer for declaration headers inside type bodies. It accepts a lot of
code a compiler would reject, which is the point.
"""

from __future__ import annotations

import bisect
import logging
import re
from dataclasses import dataclass, field
from typing import Literal

from brain.corpus import SourceDocument, preprocess

logger = logging.getLogger(__name__)

SegmentKind = Literal["method", "constructor", "interface", "enum", "fallback_whole_file"]

DEFAULT_SEGMENT_CHARS = 24_000
TRUNCATION_MARKER = "// ... [segment truncated]"


class JavaParseError(Exception):
    pass


@dataclass(frozen=True)
class CodeSegment:
    doc_id: str
    kind: SegmentKind
    name: str
    body_text: str
    start_line: int
    end_line: int


@dataclass
class SignatureSet:
    doc_id: str
    signatures: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class _Tok:
    kind: str  # ident, num, str, op
    text: str
    start: int
    end: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<badcomment>/\*)
  | (?P<textblock>\"\"\"(?:\\.|[^\\])*?\"\"\")
  | (?P<str>"(?:\\.|[^"\\\n])*"|'(?:\\.|[^'\\\n])+')
  | (?P<badstr>["'])
  | (?P<ident>[^\W\d][\w$]*|\$[\w$]*)
  | (?P<num>\d(?:[eEpP][+-]|[\w.])*)
  | (?P<op>\.\.\.|->|::|==|!=|<=|>=|&&|\|\||.)
    """,
    re.VERBOSE | re.DOTALL,
)

_OPEN = {"(": ")", "[": "]", "{": "}"}
_CLOSE = {v: k for k, v in _OPEN.items()}
_TYPE_WORDS = {"class", "interface", "enum"}
_MODIFIERS = {
    "public", "protected", "private", "static", "final", "abstract", "native",
    "synchronized", "transient", "volatile", "strictfp", "default", "sealed",
    "non-sealed",
}


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind in ("ws", "comment"):
            continue
        if kind == "badcomment":
            raise JavaParseError(f"unterminated comment at offset {m.start()}")
        if kind == "badstr":
            raise JavaParseError(f"unterminated literal at offset {m.start()}")
        if kind == "textblock":
            kind = "str"
        toks.append(_Tok(kind, m.group(), m.start(), m.end()))
    return toks


def _match_brackets(toks: list[_Tok]) -> dict[int, int]:
    match: dict[int, int] = {}
    stack: list[int] = []
    for i, t in enumerate(toks):
        if t.kind != "op":
            continue
        if t.text in _OPEN:
            stack.append(i)
        elif t.text in _CLOSE:
            if not stack or toks[stack[-1]].text != _CLOSE[t.text]:
                raise JavaParseError(f"unbalanced '{t.text}' at offset {t.start}")
            j = stack.pop()
            match[i] = j
            match[j] = i
    if stack:
        raise JavaParseError(f"unclosed '{toks[stack[-1]].text}' at offset {toks[stack[-1]].start}")
    return match


def _render(toks: list[_Tok]) -> str:
    """Join header tokens into one line with conventional Java spacing."""
    out: list[str] = []
    prev: _Tok | None = None
    depth_angle = 0
    for t in toks:
        s = t.text
        if prev is None:
            out.append(s)
        else:
            p = prev.text
            no_space = (
                s in (")", "]", ",", ".", ";", "...")
                or p in ("(", "[", ".", "@")
                or s == "(" and prev.kind == "ident"
                or s == "["
                or s == "<" and prev.kind == "ident" and p not in _MODIFIERS
                or p == "<" and depth_angle > 0
                or s == ">" and depth_angle > 0
            )
            out.append(s if no_space else " " + s)
        if s == "<":
            depth_angle += 1
        elif s == ">" and depth_angle:
            depth_angle -= 1
        prev = t
    return "".join(out)


class _JavaStructure:
    def __init__(self, doc_id: str, text: str):
        self.doc_id = doc_id
        self.text = text
        self.toks = _lex(text)
        self.match = _match_brackets(self.toks)
        self._newlines = [m.start() for m in re.finditer("\n", text)]
        self.segments: list[CodeSegment] = []
        self.signatures: list[str] = []

    # helpers ---------------------------------------------------------------

    def _line(self, offset: int) -> int:
        return bisect.bisect_right(self._newlines, offset - 1) + 1

    def _is(self, i: int, text: str) -> bool:
        return 0 <= i < len(self.toks) and self.toks[i].text == text and self.toks[i].kind == "op"

    def _ident(self, i: int, text: str | None = None) -> bool:
        if not (0 <= i < len(self.toks)) or self.toks[i].kind != "ident":
            return False
        return text is None or self.toks[i].text == text

    def _strip_annotations(self, lo: int, hi: int) -> list[int]:
        """Indices of tokens in [lo, hi) with annotations removed."""
        keep: list[int] = []
        i = lo
        while i < hi:
            if self._is(i, "@") and not self._ident(i + 1, "interface"):
                i += 1
                while i < hi and self._ident(i):
                    i += 1
                    if self._is(i, ".") and self._ident(i + 1):
                        i += 1
                    else:
                        break
                if i < hi and self._is(i, "("):
                    i = self.match[i] + 1
                continue
            keep.append(i)
            i += 1
        return keep

    def _emit(self, kind: SegmentKind, name: str, lo: int, hi: int) -> None:
        start = self.toks[lo].start
        end = self.toks[hi].end
        self.segments.append(
            CodeSegment(
                doc_id=self.doc_id,
                kind=kind,
                name=name,
                body_text=self.text[start:end],
                start_line=self._line(start),
                end_line=self._line(end - 1),
            )
        )

    def _type_keyword(self, idx: list[int]) -> tuple[str, str] | None:
        """(kind, name) if the header indices declare a type."""
        toks = self.toks
        for n, i in enumerate(idx):
            t = toks[i]
            prev_dot = n > 0 and toks[idx[n - 1]].text == "."
            if t.kind == "ident" and t.text in _TYPE_WORDS and not prev_dot:
                name = toks[idx[n + 1]].text if n + 1 < len(idx) and toks[idx[n + 1]].kind == "ident" else ""
                return t.text, name
            if t.kind == "op" and t.text == "@" and n + 1 < len(idx) and toks[idx[n + 1]].text == "interface":
                name = toks[idx[n + 2]].text if n + 2 < len(idx) else ""
                return "interface", name
            if (
                t.kind == "ident" and t.text == "record" and not prev_dot
                and n + 2 < len(idx) and toks[idx[n + 1]].kind == "ident"
                and toks[idx[n + 2]].text in ("(", "<")
            ):
                return "record", toks[idx[n + 1]].text
        return None

    # structure -------------------------------------------------------------

    def parse(self) -> None:
        i, n = 0, len(self.toks)
        while i < n:
            if self._is(i, ";"):
                i += 1
                continue
            stop = self._header_end(i, n)
            if stop is None:
                raise JavaParseError("declaration runs past end of file")
            if self.toks[stop].text == "{":
                kind = self._type_keyword(self._strip_annotations(i, stop))
                if kind:
                    i = self._type_decl(i, stop, kind)
                    continue
                i = self.match[stop] + 1
                continue
            if self.toks[stop].text == "}":
                raise JavaParseError(f"stray '}}' at offset {self.toks[stop].start}")
            i = stop + 1  # package / import

    def _header_end(self, i: int, hi: int) -> int | None:
        """First depth-0 ';', '{' or '}' at or after i, skipping () and [] groups."""
        while i < hi:
            t = self.toks[i]
            if t.kind == "op":
                if t.text in ("(", "["):
                    i = self.match[i] + 1
                    continue
                if t.text in (";", "{", "}"):
                    return i
            i += 1
        return None

    def _type_decl(self, lo: int, brace: int, kind: tuple[str, str]) -> int:
        type_kind, name = kind
        close = self.match[brace]
        header = self._strip_annotations(lo, brace)
        self.signatures.append(_render([self.toks[k] for k in header]))
        if type_kind in ("interface", "enum"):
            self._emit(type_kind, name, lo, close)  # type: ignore[arg-type]
        self._type_body(brace, name, type_kind)
        return close + 1

    def _type_body(self, brace: int, type_name: str | None, type_kind: str) -> None:
        close = self.match[brace]
        i = brace + 1
        if type_kind == "enum":
            i = self._enum_constants(i, close)
        while i < close:
            if self._is(i, ";"):
                i += 1
                continue
            i = self._member(i, close, type_name)

    def _enum_constants(self, i: int, close: int) -> int:
        expecting_name = True
        while i < close:
            t = self.toks[i]
            if t.kind == "op" and t.text == ";":
                return i + 1
            if t.kind == "op" and t.text == "@":
                kept = self._strip_annotations(i, close)
                i = kept[0] if kept else close
                continue
            if expecting_name and t.kind == "ident":
                self.signatures.append(t.text)
                expecting_name = False
            elif t.kind == "op" and t.text == ",":
                expecting_name = True
            elif t.kind == "op" and t.text in ("(", "["):
                self._scan(i + 1, self.match[i])
                i = self.match[i] + 1
                continue
            elif t.kind == "op" and t.text == "{":
                self._type_body(i, None, "class")
                i = self.match[i] + 1
                continue
            i += 1
        return close

    def _member(self, lo: int, close: int, type_name: str | None) -> int:
        stop = self._header_end(lo, close + 1)
        if stop is None:
            raise JavaParseError("malformed member declaration")
        header = self._strip_annotations(lo, stop)
        htoks = [self.toks[k] for k in header]
        texts = [t.text for t in htoks]
        stop_text = self.toks[stop].text

        if stop_text == "}":
            # trailing garbage before the closing brace of the type
            if header:
                logger.debug("ignoring dangling tokens before '}' at offset %d", self.toks[stop].start)
            return stop

        eq = self._depth0_index(header, "=")
        paren = self._depth0_index(header, "(")

        if eq is not None and (paren is None or eq < paren):
            # field with initializer; initializer may contain braces
            end = self._statement_end(stop, close)
            self.signatures.append(self._field_signature(lo, end))
            self._scan(header[eq] + 1, end)
            return end + 1

        if stop_text == ";":
            if paren is not None:
                self.signatures.append(self._method_signature(htoks, paren))
            elif header:
                self.signatures.append(self._field_signature(lo, stop))
            return stop + 1

        # stop_text == "{"
        kind = self._type_keyword(header)
        if kind:
            return self._type_decl(lo, stop, kind)
        body_close = self.match[stop]
        if paren is not None:
            name_idx = paren - 1
            name = texts[name_idx] if name_idx >= 0 else ""
            seg_kind: SegmentKind = "constructor" if type_name and name == type_name else "method"
            self.signatures.append(self._method_signature(htoks, paren))
            self._emit(seg_kind, name, lo, body_close)
        elif texts and type_name and texts[-1] == type_name and all(
            t in _MODIFIERS or t == type_name for t in texts
        ):
            # compact record constructor
            self.signatures.append(_render(htoks))
            self._emit("constructor", type_name, lo, body_close)
        # instance/static initializers and anything unrecognised: no segment
        self._scan(stop + 1, body_close)
        return body_close + 1

    def _depth0_index(self, header: list[int], text: str) -> int | None:
        """Position within header of the first top-level token equal to text."""
        skip_to = -1
        for n, k in enumerate(header):
            if k <= skip_to:
                continue
            t = self.toks[k]
            if t.kind == "op" and t.text == text:
                return n
            if t.kind == "op" and t.text in ("(", "[") and text not in ("(", "["):
                skip_to = self.match[k]
        return None

    def _statement_end(self, i: int, close: int) -> int:
        while i < close:
            t = self.toks[i]
            if t.kind == "op" and t.text in _OPEN:
                i = self.match[i] + 1
                continue
            if t.kind == "op" and t.text == ";":
                return i
            i += 1
        return close

    def _method_signature(self, htoks: list[_Tok], paren: int) -> str:
        # header up to the parameter list close, plus any throws clause
        depth = 0
        end = len(htoks)
        for n in range(paren, len(htoks)):
            if htoks[n].text == "(":
                depth += 1
            elif htoks[n].text == ")":
                depth -= 1
                if depth == 0:
                    end = n + 1
                    break
        tail = htoks[end:]
        if tail and tail[0].text == "throws":
            end = len(htoks)
            for n, t in enumerate(tail):
                if t.text == "default":
                    end = end - len(tail) + n
                    break
        return _render(htoks[:end])

    def _field_signature(self, lo: int, end: int) -> str:
        """Declaration text with every `= initializer` removed."""
        idx = self._strip_annotations(lo, end)
        kept: list[_Tok] = []
        n = 0
        while n < len(idx):
            k = idx[n]
            t = self.toks[k]
            if t.kind == "op" and t.text == "=":
                # drop until the next top-level comma
                n += 1
                while n < len(idx):
                    kk = idx[n]
                    tt = self.toks[kk]
                    if tt.kind == "op" and tt.text in _OPEN:
                        stop = self.match[kk]
                        while n < len(idx) and idx[n] <= stop:
                            n += 1
                        continue
                    if tt.kind == "op" and tt.text == ",":
                        break
                    n += 1
                continue
            kept.append(t)
            n += 1
        return _render(kept)

    def _scan(self, lo: int, hi: int) -> None:
        """Walk a code region looking for local and anonymous classes."""
        anon: set[int] = set()
        i = lo
        while i < hi:
            t = self.toks[i]
            if t.kind == "op" and t.text == "{" and i in anon:
                self._type_body(i, None, "class")
                i = self.match[i] + 1
                continue
            if t.kind == "ident":
                prev_dot = i > 0 and self._is(i - 1, ".")
                if t.text in _TYPE_WORDS and not prev_dot and self._ident(i + 1):
                    stop = self._header_end(i, hi)
                    if stop is not None and self.toks[stop].text == "{":
                        i = self._type_decl(i, stop, (t.text, self.toks[i + 1].text))
                        continue
                elif (
                    t.text == "record" and not prev_dot and self._ident(i + 1)
                    and (self._is(i + 2, "(") or self._is(i + 2, "<"))
                ):
                    stop = self._header_end(i, hi)
                    if stop is not None and self.toks[stop].text == "{":
                        i = self._type_decl(i, stop, ("record", self.toks[i + 1].text))
                        continue
                elif t.text == "new":
                    body = self._anonymous_body(i, hi)
                    if body is not None:
                        anon.add(body)
            i += 1

    def _anonymous_body(self, i: int, hi: int) -> int | None:
        j = i + 1
        while j < hi and (self._ident(j) or self._is(j, ".") or self._is(j, "@")):
            j += 1
        if self._is(j, "<"):
            depth = 0
            while j < hi:
                if self._is(j, "<"):
                    depth += 1
                elif self._is(j, ">"):
                    depth -= 1
                    if depth == 0:
                        j += 1
                        break
                elif self._is(j, ";") or self._is(j, "{"):
                    return None
                j += 1
        if not self._is(j, "("):
            return None
        j = self.match[j] + 1
        if j < hi and self._is(j, "{"):
            return j
        return None


def _truncate(seg: CodeSegment, max_chars: int) -> CodeSegment:
    if len(seg.body_text) <= max_chars:
        return seg
    text = seg.body_text[:max_chars].rstrip("\n") + "\n" + TRUNCATION_MARKER
    return CodeSegment(seg.doc_id, seg.kind, seg.name, text, seg.start_line, seg.end_line)


def segment_document(doc: SourceDocument, max_chars: int = DEFAULT_SEGMENT_CHARS) -> list[CodeSegment]:
    """Split a Java file into method, constructor, interface and enum segments.

    Falls back to a single whole-file segment when the file cannot be parsed
    or declares no segmentable member.
    """
    try:
        structure = _JavaStructure(doc.doc_id, doc.content)
        structure.parse()
        segments = sorted(structure.segments, key=lambda s: (s.start_line, -s.end_line, s.kind, s.name))
    except JavaParseError as exc:
        logger.info("parse failed for %s: %s; using whole-file segment", doc.path, exc)
        segments = []
    if not segments:
        segments = [
            CodeSegment(
                doc_id=doc.doc_id,
                kind="fallback_whole_file",
                name=doc.path.rsplit("/", 1)[-1],
                body_text=doc.content,
                start_line=1,
                end_line=max(1, doc.content.count("\n") + (0 if doc.content.endswith("\n") else 1)),
            )
        ]
    return [_truncate(s, max_chars) for s in segments]


def extract_signatures(doc: SourceDocument) -> SignatureSet:
    """Class, method and field declaration headers, without bodies or initializers."""
    try:
        structure = _JavaStructure(doc.doc_id, doc.content)
        structure.parse()
    except JavaParseError as exc:
        logger.info("signature extraction failed for %s: %s", doc.path, exc)
        return SignatureSet(doc.doc_id, [])
    return SignatureSet(doc.doc_id, [s for s in structure.signatures if s])


def signatures_to_phrases(sig: SignatureSet) -> list[list[str]]:
    phrases = (preprocess(s, code=True) for s in sig.signatures)
    return [p for p in phrases if p]
