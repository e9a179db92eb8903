"""Minimal PDF text-layer extraction.

Internal adapter behind corpus.extract_text. It handles well-formed PDFs
whose text is stored in plain, Flate- or ASCII85-encoded content streams
with single-byte encoded fonts (the kind produced by common generators and
OCR tools that add a text layer). It is intentionally not a general PDF
renderer: files it cannot make sense of raise MalformedFile, and files
that parse but contain no text raise NoTextLayer upstream.
"""

from __future__ import annotations

import base64
import re
import zlib

from .errors import MalformedFile

_OBJ_RE = re.compile(rb"(\d+)\s+\d+\s+obj\b(.*?)endobj", re.S)
_WHITESPACE = b"\x00\t\n\x0c\r "
_DELIMITERS = b"()<>[]{}/%"


class _Ref:
    __slots__ = ("num",)

    def __init__(self, num):
        self.num = num


class _Name(str):
    pass


def _skip_ws(data, pos):
    while pos < len(data):
        ch = data[pos:pos + 1]
        if ch == b"%":  # comment runs to end of line
            while pos < len(data) and data[pos:pos + 1] not in b"\r\n":
                pos += 1
        elif ch in _WHITESPACE:
            pos += 1
        else:
            break
    return pos


def _parse_value(data, pos):
    """Parse one PDF object value starting at pos; return (value, new_pos)."""
    pos = _skip_ws(data, pos)
    if pos >= len(data):
        raise MalformedFile("unexpected end of PDF data")
    ch = data[pos:pos + 1]

    if data.startswith(b"<<", pos):
        return _parse_dict(data, pos)
    if ch == b"[":
        return _parse_array(data, pos)
    if ch == b"(":
        return _parse_literal_string(data, pos)
    if ch == b"<":
        return _parse_hex_string(data, pos)
    if ch == b"/":
        return _parse_name(data, pos)
    if data.startswith(b"true", pos):
        return True, pos + 4
    if data.startswith(b"false", pos):
        return False, pos + 5
    if data.startswith(b"null", pos):
        return None, pos + 4
    return _parse_number_or_ref(data, pos)


def _parse_dict(data, pos):
    pos += 2
    result = {}
    while True:
        pos = _skip_ws(data, pos)
        if data.startswith(b">>", pos):
            return result, pos + 2
        if not data.startswith(b"/", pos):
            raise MalformedFile("expected name key in PDF dictionary")
        key, pos = _parse_name(data, pos)
        value, pos = _parse_value(data, pos)
        result[str(key)] = value


def _parse_array(data, pos):
    pos += 1
    items = []
    while True:
        pos = _skip_ws(data, pos)
        if data.startswith(b"]", pos):
            return items, pos + 1
        value, pos = _parse_value(data, pos)
        items.append(value)


def _parse_name(data, pos):
    pos += 1
    start = pos
    while pos < len(data):
        ch = data[pos:pos + 1]
        if ch in _WHITESPACE or ch in _DELIMITERS:
            break
        pos += 1
    raw = data[start:pos]
    # #xx escapes inside names
    text = re.sub(rb"#([0-9A-Fa-f]{2})", lambda m: bytes([int(m.group(1), 16)]), raw)
    return _Name(text.decode("latin-1")), pos


_STRING_ESCAPES = {
    b"n": b"\n", b"r": b"\r", b"t": b"\t", b"b": b"\b", b"f": b"\x0c",
    b"(": b"(", b")": b")", b"\\": b"\\",
}


def _parse_literal_string(data, pos):
    pos += 1
    depth = 1
    out = bytearray()
    while pos < len(data):
        ch = data[pos:pos + 1]
        if ch == b"\\":
            nxt = data[pos + 1:pos + 2]
            if nxt in _STRING_ESCAPES:
                out += _STRING_ESCAPES[nxt]
                pos += 2
            elif nxt.isdigit():
                digits = b""
                pos += 1
                while len(digits) < 3 and data[pos:pos + 1].isdigit():
                    digits += data[pos:pos + 1]
                    pos += 1
                out.append(int(digits, 8) & 0xFF)
            elif nxt in b"\r\n":  # line continuation
                pos += 2
                if nxt == b"\r" and data[pos:pos + 1] == b"\n":
                    pos += 1
            else:
                out += nxt
                pos += 2
        elif ch == b"(":
            depth += 1
            out += ch
            pos += 1
        elif ch == b")":
            depth -= 1
            if depth == 0:
                return bytes(out), pos + 1
            out += ch
            pos += 1
        else:
            out += ch
            pos += 1
    raise MalformedFile("unterminated PDF string")


def _parse_hex_string(data, pos):
    end = data.index(b">", pos)
    hex_digits = re.sub(rb"[^0-9A-Fa-f]", b"", data[pos + 1:end])
    if len(hex_digits) % 2:
        hex_digits += b"0"
    return bytes.fromhex(hex_digits.decode("ascii")), end + 1


_NUMBER_RE = re.compile(rb"[+-]?(?:\d+\.?\d*|\.\d+)")
_REF_RE = re.compile(rb"(\d+)\s+\d+\s+R\b")


def _parse_number_or_ref(data, pos):
    ref = _REF_RE.match(data, pos)
    if ref:
        return _Ref(int(ref.group(1))), ref.end()
    num = _NUMBER_RE.match(data, pos)
    if not num:
        raise MalformedFile(f"unparseable PDF token at offset {pos}")
    text = num.group(0)
    value = float(text) if b"." in text else int(text)
    return value, num.end()


class _PdfFile:
    def __init__(self, data: bytes):
        if not data.startswith(b"%PDF-"):
            raise MalformedFile("missing %PDF header")
        self.objects = {}
        for match in _OBJ_RE.finditer(data):
            self.objects[int(match.group(1))] = match.group(2)
        if not self.objects:
            raise MalformedFile("no PDF objects found")
        self._dicts = {}

    def dict_of(self, num):
        if num not in self._dicts:
            body = self.objects.get(num, b"")
            pos = _skip_ws(body, 0)
            if body.startswith(b"<<", pos):
                self._dicts[num], _ = _parse_dict(body, pos)
            else:
                self._dicts[num] = {}
        return self._dicts[num]

    def resolve(self, value):
        while isinstance(value, _Ref):
            value = self.dict_of(value.num)
        return value

    def stream_of(self, num) -> bytes:
        body = self.objects.get(num)
        if body is None:
            return b""
        idx = body.find(b"stream")
        if idx < 0:
            return b""
        start = idx + len(b"stream")
        if body.startswith(b"\r\n", start):
            start += 2
        elif body.startswith(b"\n", start) or body.startswith(b"\r", start):
            start += 1
        end = body.rfind(b"endstream")
        if end < 0:
            raise MalformedFile("stream without endstream")
        raw = body[start:end]
        return self._decode_stream(self.dict_of(num), raw)

    @staticmethod
    def _decode_stream(info, raw: bytes) -> bytes:
        filters = info.get("Filter")
        if filters is None:
            filters = []
        elif not isinstance(filters, list):
            filters = [filters]
        for filt in filters:
            name = str(filt)
            try:
                if name == "FlateDecode":
                    raw = zlib.decompress(raw)
                elif name == "ASCII85Decode":
                    raw = base64.a85decode(raw.strip(), adobe=True)
                elif name == "ASCIIHexDecode":
                    raw = bytes.fromhex(
                        re.sub(rb"[^0-9A-Fa-f]", b"", raw.rstrip(b">")).decode("ascii")
                    )
                else:
                    # Unsupported filter (image data, etc.): no text here.
                    return b""
            except (zlib.error, ValueError) as exc:
                raise MalformedFile(f"undecodable PDF stream: {exc}") from None
        return raw

    def page_numbers(self) -> list[int]:
        """Object numbers of page objects, in page-tree order."""
        root = None
        for num, info in ((n, self.dict_of(n)) for n in sorted(self.objects)):
            if str(info.get("Type", "")) == "Catalog":
                root = info.get("Pages")
                break
        pages = []
        seen = set()

        def walk(node_ref):
            if not isinstance(node_ref, _Ref) or node_ref.num in seen:
                return
            seen.add(node_ref.num)
            node = self.dict_of(node_ref.num)
            node_type = str(node.get("Type", ""))
            if node_type == "Page":
                pages.append(node_ref.num)
            else:
                for kid in node.get("Kids", []) or []:
                    walk(kid)

        walk(root)
        if not pages:  # damaged or missing tree: fall back to scan order
            pages = [n for n in sorted(self.objects)
                     if str(self.dict_of(n).get("Type", "")) == "Page"]
        return pages

    def page_content(self, page_num) -> bytes:
        contents = self.dict_of(page_num).get("Contents")
        if contents is None:
            return b""
        refs = contents if isinstance(contents, list) else [contents]
        return b"\n".join(
            self.stream_of(ref.num) for ref in refs if isinstance(ref, _Ref)
        )


def _content_text(content: bytes) -> str:
    """Pull shown text out of a page content stream.

    Tracks string/array operands and emits on the text-showing operators
    (Tj, TJ, ', \"); text-positioning operators start a new line.
    """
    pos = 0
    operands = []
    lines = [[]]

    def newline():
        if lines[-1]:
            lines.append([])

    while pos < len(content):
        pos = _skip_ws(content, pos)
        if pos >= len(content):
            break
        ch = content[pos:pos + 1]
        if ch == b"(":
            value, pos = _parse_literal_string(content, pos)
            operands.append(value)
        elif content.startswith(b"<<", pos):
            value, pos = _parse_dict(content, pos)
            operands.append(value)
        elif ch == b"<":
            value, pos = _parse_hex_string(content, pos)
            operands.append(value)
        elif ch == b"[":
            value, pos = _parse_array(content, pos)
            operands.append(value)
        elif ch == b"/":
            value, pos = _parse_name(content, pos)
            operands.append(value)
        elif _NUMBER_RE.match(content, pos):
            match = _NUMBER_RE.match(content, pos)
            operands.append(match.group(0))
            pos = match.end()
        else:
            start = pos
            while pos < len(content):
                nxt = content[pos:pos + 1]
                if nxt in _WHITESPACE or nxt in _DELIMITERS:
                    break
                pos += 1
            op = content[start:pos]
            if pos == start:  # stray delimiter; skip it
                pos += 1
                continue
            if op == b"Tj" and operands:
                lines[-1].append(_decode_pdf_text(operands[-1]))
            elif op == b"TJ" and operands and isinstance(operands[-1], list):
                shown = b"".join(x for x in operands[-1] if isinstance(x, bytes))
                lines[-1].append(_decode_pdf_text(shown))
            elif op == b"'":
                newline()
                if operands:
                    lines[-1].append(_decode_pdf_text(operands[-1]))
            elif op == b'"':
                newline()
                if operands:
                    lines[-1].append(_decode_pdf_text(operands[-1]))
            elif op in (b"Td", b"TD", b"T*", b"ET"):
                newline()
            operands = []
    return "\n".join("".join(parts) for parts in lines if parts)


def _decode_pdf_text(raw) -> str:
    if not isinstance(raw, bytes):
        return ""
    if raw.startswith(b"\xfe\xff"):
        return raw[2:].decode("utf-16-be", errors="replace")
    return raw.decode("latin-1")


def extract_page_texts(data: bytes) -> list[str]:
    """Text of each page, in order. Raises MalformedFile on parse failure."""
    pdf = _PdfFile(data)
    texts = []
    for page_num in pdf.page_numbers():
        try:
            texts.append(_content_text(pdf.page_content(page_num)))
        except MalformedFile:
            texts.append("")
    return texts
