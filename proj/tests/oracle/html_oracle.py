#!/usr/bin/env python3
"""Reference HTML-to-text extraction used to freeze expected outputs.

Implements the documented extraction semantics independently, on top of the
standard library's html.parser (which owns entity decoding): script/style
and comments dropped, block tags introduce segment boundaries, whitespace
collapsed, sentences split after terminal punctuation followed by spaces and
a capital letter.

Usage: python3 html_oracle.py > ../fixtures/html_expected.json
"""

import json
import re
from html.parser import HTMLParser

BLOCK_TAGS = {
    "address", "article", "aside", "blockquote", "body", "br", "caption",
    "dd", "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer",
    "form", "h1", "h2", "h3", "h4", "h5", "h6", "head", "header", "hr",
    "html", "li", "main", "nav", "noscript", "ol", "p", "pre", "section",
    "table", "tbody", "td", "tfoot", "th", "thead", "title", "tr", "ul",
}


class Extractor(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.segments = []
        self.current = []
        self.skip_depth = 0

    def flush(self):
        text = " ".join("".join(self.current).split())
        if text:
            self.segments.append(text)
        self.current = []

    def handle_starttag(self, tag, attrs):
        if tag in ("script", "style"):
            self.skip_depth += 1
            self.flush()
            return
        if tag in BLOCK_TAGS:
            self.flush()

    def handle_endtag(self, tag):
        if tag in ("script", "style"):
            self.skip_depth = max(0, self.skip_depth - 1)
            return
        if tag in BLOCK_TAGS:
            self.flush()

    def handle_startendtag(self, tag, attrs):
        self.handle_starttag(tag, attrs)
        if tag not in ("script", "style"):
            self.handle_endtag(tag)
        else:
            self.skip_depth = max(0, self.skip_depth - 1)

    def handle_data(self, data):
        if self.skip_depth == 0:
            self.current.append(data)


SENTENCE_RE = re.compile(r"([.!?]+)( +)(?=[A-Z])")


def split_sentences(segment):
    out = []
    start = 0
    for m in SENTENCE_RE.finditer(segment):
        out.append(segment[start:m.end(1)])
        start = m.end(2)
    if start < len(segment):
        out.append(segment[start:])
    return out


def extract(html):
    parser = Extractor()
    parser.feed(html)
    parser.close()
    parser.flush()
    sentences = []
    for seg in parser.segments:
        sentences.extend(split_sentences(seg))
    return {"text": " ".join(sentences), "sentences": sentences}


SAMPLES = [
    "<p>Cats purr.</p><script>x()</script>",
    "<div>A.</div><div>B.</div>",
    "<html><head><title>Vitamin C</title><style>.a{color:red}</style></head>"
    "<body><p>Tea &amp; honey help. Zinc may not.</p></body></html>",
    "<p>Dose: 50&#37; &#x41;-grade</p>",
    "<p>He said &quot;no&quot;. Then left.</p>",
    "<ul><li>First item</li><li>Second item. Also this</li></ul>",
    "<p>Space&nbsp;separated words</p>",
    "<div>Nested <span>inline <b>bold</b> text</span> flows. Next sentence here.</div>",
    "<!-- hidden -->Visible<br>after break. lowercase stays joined",
    "<table><tr><td>Cell one</td><td>Cell two.</td></tr></table><p>Footer &copy; 2026</p>",
]


def main():
    docs = []
    for i, html in enumerate(SAMPLES):
        result = extract(html)
        docs.append({
            "doc_id": f"h{i:02d}",
            "html": html,
            "text": result["text"],
            "sentences": result["sentences"],
        })
    print(json.dumps({"docs": docs}, indent=1))


if __name__ == "__main__":
    main()
