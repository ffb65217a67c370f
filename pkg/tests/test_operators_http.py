"""HTTP query building, offline fetching, and endpoint querying."""

import json

import pytest

from wexfab.fixtures import FixtureStore, normalize_url, write_store
from wexfab.items import HttpRequest, Item, Text, Url
from wexfab.operators import build_http_query, fetch, query_service

# Independent form-urlencoding oracle: percent-encode every byte outside the
# unreserved set, then turn spaces into '+'.  Deliberately not urllib.
_UNRESERVED = set("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~")


def oracle_encode_component(text: str) -> str:
    out = []
    for byte in text.encode("utf-8"):
        ch = chr(byte)
        if ch in _UNRESERVED:
            out.append(ch)
        elif ch == " ":
            out.append("+")
        else:
            out.append(f"%{byte:02X}")
    return "".join(out)


def oracle_form_encode(pairs) -> str:
    return "&".join(f"{oracle_encode_component(k)}={oracle_encode_component(v)}" for k, v in pairs)


class TestBuildHttpQuery:
    def test_empty_pairs(self):
        items = build_http_query("GET", "http://dblp.uni-trier.de", [])
        assert len(items) == 1
        req = items[0].payload
        assert (req.method, req.url) == ("GET", "http://dblp.uni-trier.de")

    def test_get_encodes_space_as_plus(self):
        items = build_http_query("GET", "http://s.example/search", [("q", "tina arch")])
        assert items[0].payload.url == "http://s.example/search?q=tina+arch"

    @pytest.mark.parametrize(
        "pairs",
        [
            [("q", "tina arch")],
            [("a b", "c&d"), ("e", "f=g")],
            [("unicode", "héllo wörld")],
            [("keep", "A-Za-z0-9._~")],
            [("order1", "x"), ("order0", "y")],
        ],
    )
    def test_encoding_matches_independent_oracle(self, pairs):
        items = build_http_query("GET", "http://s.example/p", pairs)
        assert items[0].payload.url == "http://s.example/p?" + oracle_form_encode(pairs)

    def test_head_request(self):
        items = build_http_query("HEAD", "http://h.example/doc.pdf", [])
        assert items[0].payload.method == "HEAD"

    def test_post_puts_pairs_in_body(self):
        items = build_http_query("POST", "http://s.example/p", [("a", "b c")])
        req = items[0].payload
        assert req.body == b"a=b+c"
        assert dict(req.headers)["content-type"] == "application/x-www-form-urlencoded"

    @pytest.mark.parametrize("bad", ["relative/path", "ftp://x.example/", "http://x.example/#frag", "not a url"])
    def test_unusable_base_url_is_an_error(self, bad):
        assert build_http_query("GET", bad, []) == []

    def test_returns_at_most_one_item(self):
        for base in ("http://ok.example/", "bogus"):
            assert len(build_http_query("GET", base, [("a", "b")])) <= 1


class TestNormalizeUrl:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("HTTP://Example.COM/Path", "http://example.com/Path"),
            ("http://example.com:80/x", "http://example.com/x"),
            ("https://example.com:443/", "https://example.com/"),
            ("http://example.com:8080/x", "http://example.com:8080/x"),
            ("http://example.com", "http://example.com/"),
            ("http://e.com/p?b=2&a=1", "http://e.com/p?b=2&a=1"),
        ],
    )
    def test_normalization(self, raw, expected):
        assert normalize_url(raw) == expected


@pytest.fixture()
def store(tmp_path):
    write_store(
        tmp_path,
        {
            "GET http://a.example/page": {
                "status": 200,
                "headers": {"content-type": "text/html"},
                "body": b"<html>hi</html>",
            },
            "HEAD http://a.example/page": {
                "status": 200,
                "headers": {
                    "content-type": "text/html",
                    "content-length": "15",
                    "last-modified": "Tue, 15 Jun 2004 10:00:00 GMT",
                },
            },
            "GET http://a.example/gone": {"status": 404, "headers": {}, "body": b"nope"},
        },
    )
    return FixtureStore(tmp_path)


class TestFetch:
    def test_offline_round_trip(self, store):
        items = fetch(Item(Url("http://a.example/page")), store)
        assert len(items) == 1
        resp = items[0].payload
        assert resp.status == 200
        assert resp.body == b"<html>hi</html>"
        assert resp.url == "http://a.example/page"

    def test_unfixtured_url_is_empty(self, store):
        assert fetch(Item(Url("http://a.example/missing")), store) == []

    def test_status_400_and_up_is_an_error(self, store):
        assert fetch(Item(Url("http://a.example/gone")), store) == []

    def test_head_carries_headers_and_empty_body(self, store):
        items = fetch(Item(Url("http://a.example/page")), store, method_override="HEAD")
        resp = items[0].payload
        assert resp.body == b""
        headers = dict(resp.headers)
        assert {"content-type", "content-length", "last-modified"} <= set(headers)

    def test_text_payload_coerced_to_url(self, store):
        assert fetch(Item(Text("http://a.example/page")), store)[0].payload.status == 200
        assert fetch(Item(Text("not a url")), store) == []

    def test_prepared_request_used_as_is(self, store):
        req = HttpRequest("GET", "http://a.example/page")
        assert fetch(Item(req), store)[0].payload.status == 200

    def test_offline_without_store_is_an_error(self):
        assert fetch(Item(Url("http://a.example/page")), None) == []

    def test_google_head_fixture_header_triple(self, google_fixtures):
        # the shipped index is the oracle for the expected header set
        store = FixtureStore(google_fixtures)
        index = json.loads((google_fixtures / "index.json").read_text())
        for key, entry in index.items():
            method, _, url = key.partition(" ")
            if method != "HEAD":
                continue
            items = fetch(Item(Url(url)), store, method_override="HEAD")
            assert dict(items[0].payload.headers) == entry["headers"]


class TestQueryService:
    def test_mock_endpoint_round_trip(self, google_fixtures):
        store = FixtureStore(google_fixtures)
        items = query_service(
            Item(Text("")),
            "http://search.example/doGoogleSearch",
            [("q", "information extraction")],
            store=store,
        )
        assert len(items) == 1
        assert b"<results>" in items[0].payload.body

    def test_input_placeholder_substitution(self, google_fixtures):
        store = FixtureStore(google_fixtures)
        items = query_service(
            Item(Text("information extraction")),
            "http://search.example/doGoogleSearch",
            [("q", "$input")],
            store=store,
        )
        assert len(items) == 1

    def test_missing_fixture_propagates_error(self, store):
        assert query_service(Item(Text("x")), "http://b.example/api", [("q", "x")], store=store) == []

    def test_offline_purity(self, google_fixtures):
        store = FixtureStore(google_fixtures)
        call = lambda: query_service(
            Item(Text("")), "http://search.example/doGoogleSearch",
            [("q", "information extraction")], store=store,
        )
        first, second = call(), call()
        assert first == second
