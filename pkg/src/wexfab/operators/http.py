"""HTTP query building, fetching, and endpoint querying.

All three follow the shared operator contract: one input item in, a finite
list of items out, with an empty list signalling an error instead of an
exception reaching the engine.
"""

from __future__ import annotations

import logging
import time
import urllib.error
import urllib.request
from urllib.parse import quote_plus, urlsplit

from ..fixtures import FixtureMissing, FixtureStore
from ..items import HttpRequest, HttpResponse, Item, Text, Url

logger = logging.getLogger(__name__)

FORM_CONTENT_TYPE = "application/x-www-form-urlencoded"


def form_encode(pairs: list[tuple[str, str]]) -> str:
    """HTML-form encoding: spaces become '+', reserved bytes are percent
    escaped, pair order is preserved."""
    return "&".join(f"{quote_plus(k)}={quote_plus(v)}" for k, v in pairs)


def build_http_query(method: str, base_url: str, pairs: list[tuple[str, str]]) -> list[Item]:
    """Compose exactly one HTTP request item, or nothing if the base URL is
    unusable (relative, fragment-bearing, or unparsable)."""
    method = method.upper()
    if method not in ("GET", "POST", "HEAD"):
        return []
    parts = urlsplit(base_url)
    if parts.scheme not in ("http", "https") or not parts.netloc or parts.fragment:
        return []
    if method == "POST":
        body = form_encode(pairs).encode("ascii")
        request = HttpRequest(method, base_url, (("content-type", FORM_CONTENT_TYPE),), body)
    else:
        url = base_url
        if pairs:
            url += "&" if parts.query else "?"
            url += form_encode(pairs)
        request = HttpRequest(method, url)
    return [Item(request)]


def fetch(item: Item, store: FixtureStore | None = None, *, offline: bool = True,
          method_override: str | None = None, min_interval: float = 0.5) -> list[Item]:
    """Download the document an item points at.

    The input may be a URL, a bare text that parses as an absolute URL (the
    usual shape of extraction output feeding a fetch stage), or a prepared
    request.  Offline mode answers strictly from the fixture store; errors,
    missing fixtures, and status >= 400 all yield the empty list.
    """
    payload = item.payload
    if isinstance(payload, HttpRequest):
        request = payload
    elif isinstance(payload, (Url, Text)):
        built = build_http_query(method_override or "GET", payload.value, [])
        if not built:
            return []
        request = built[0].payload  # type: ignore[assignment]
    else:
        return []
    if method_override:
        request = HttpRequest(method_override.upper(), request.url, request.headers, request.body)

    if offline:
        if store is None:
            return []
        try:
            entry = store.lookup(request.method, request.url)
        except FixtureMissing:
            logger.debug("no fixture for %s %s", request.method, request.url)
            return []
        if entry.status >= 400:
            return []
        body = b"" if request.method == "HEAD" else entry.body
        return [Item(HttpResponse(entry.status, entry.headers, body, request.url))]
    return _fetch_live(request, min_interval)


_last_live_fetch = [0.0]


def _fetch_live(request: HttpRequest, min_interval: float) -> list[Item]:
    wait = _last_live_fetch[0] + min_interval - time.monotonic()
    if wait > 0:
        time.sleep(wait)
    _last_live_fetch[0] = time.monotonic()
    req = urllib.request.Request(
        request.url,
        data=request.body or None,
        headers=dict(request.headers),
        method=request.method,
    )
    try:
        with urllib.request.urlopen(req, timeout=30) as resp:
            body = b"" if request.method == "HEAD" else resp.read()
            headers = tuple((k.lower(), v) for k, v in resp.headers.items())
            return [Item(HttpResponse(resp.status, headers, body, request.url))]
    except (urllib.error.URLError, OSError, ValueError) as exc:
        logger.warning("fetch failed for %s: %s", request.url, exc)
        return []


def query_service(item: Item, endpoint_url: str, pairs: list[tuple[str, str]],
                  method: str = "GET", store: FixtureStore | None = None,
                  *, offline: bool = True) -> list[Item]:
    """Call a preconfigured endpoint: build the request, then fetch it.

    Pair values may contain the $input placeholder, replaced by the incoming
    item's text so upstream operators can parameterize the call.
    """
    text = _item_text(item)
    resolved = [(k, v.replace("$input", text)) for k, v in pairs]
    built = build_http_query(method, endpoint_url, resolved)
    if not built:
        return []
    return fetch(built[0], store, offline=offline)


def _item_text(item: Item) -> str:
    payload = item.payload
    if isinstance(payload, (Text, Url)):
        return payload.value
    if isinstance(payload, HttpResponse):
        return payload.text()
    return ""
