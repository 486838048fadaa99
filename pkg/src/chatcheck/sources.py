"""Liveness checks for model-cited source URLs.

A URL is kept only if it answers with HTTP 200 within the time budget
(following up to five redirects, HEAD first with a GET fallback). This is
liveness only: no cookies, no scripts, no check that the page actually
supports the claim.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence
from urllib.parse import urljoin, urlparse

import requests

from chatcheck import __version__

VALID = "valid"
INVALID = "invalid"
TIMEOUT = "timeout"
MALFORMED = "malformed"

DEFAULT_TIMEOUT = 5.0
DEFAULT_PARALLELISM = 4
MAX_REDIRECTS = 5

USER_AGENT = f"chatcheck-source-validator/{__version__} (liveness check)"

_REDIRECT_CODES = (301, 302, 303, 307, 308)


@dataclass(frozen=True)
class ValidationResult:
    url: str
    status: str  # valid | invalid | timeout | malformed
    http_status: Optional[int]
    latency: float

    def __post_init__(self) -> None:
        if (self.status == VALID) != (self.http_status == 200):
            raise ValueError("status must be valid exactly when the final HTTP status is 200")


def _well_formed(url: str) -> bool:
    try:
        parsed = urlparse(url)
    except ValueError:
        return False
    return parsed.scheme in ("http", "https") and bool(parsed.netloc)


def _fetch_final_status(
    session, url: str, method: str, deadline: float, follow_redirects: bool
) -> Optional[int]:
    """Final status after following redirects; None means the hop budget
    ran out. The whole chain shares one deadline."""
    current = url
    for _ in range(MAX_REDIRECTS + 1):
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise requests.Timeout(f"deadline exhausted for {current}")
        resp = session.request(
            method,
            current,
            timeout=remaining,
            allow_redirects=False,
            stream=True,
            headers={"User-Agent": USER_AGENT},
        )
        resp.close()
        location = resp.headers.get("Location")
        if follow_redirects and resp.status_code in _REDIRECT_CODES and location:
            current = urljoin(current, location)
            continue
        return resp.status_code
    return None


def validate_url(
    url: str,
    timeout: float = DEFAULT_TIMEOUT,
    *,
    follow_redirects: bool = True,
    session=None,
) -> ValidationResult:
    """Check one URL; every outcome is encoded in the result, nothing raises."""
    started = time.monotonic()
    if not url or not _well_formed(url):
        return ValidationResult(url=url, status=MALFORMED, http_status=None, latency=0.0)

    sess = session or requests.Session()
    deadline = started + timeout
    try:
        final = _fetch_final_status(sess, url, "HEAD", deadline, follow_redirects)
        if final in (405, 501):  # server rejects HEAD
            final = _fetch_final_status(sess, url, "GET", deadline, follow_redirects)
    except requests.Timeout:
        return ValidationResult(url, TIMEOUT, None, time.monotonic() - started)
    except requests.RequestException:
        return ValidationResult(url, INVALID, None, time.monotonic() - started)
    finally:
        if session is None:
            sess.close()

    latency = time.monotonic() - started
    if final == 200:
        return ValidationResult(url, VALID, 200, latency)
    return ValidationResult(url, INVALID, final, latency)


def validate_all(
    urls: Sequence[str],
    timeout: float = DEFAULT_TIMEOUT,
    parallelism: int = DEFAULT_PARALLELISM,
    *,
    follow_redirects: bool = True,
) -> List[ValidationResult]:
    """Validate a batch with bounded concurrency.

    Output order matches input order; duplicate URLs are fetched once and
    share one result.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    if not urls:
        return []

    unique = list(dict.fromkeys(urls))
    session = requests.Session()
    adapter = requests.adapters.HTTPAdapter(
        pool_connections=parallelism, pool_maxsize=parallelism * 2
    )
    session.mount("http://", adapter)
    session.mount("https://", adapter)
    try:
        with ThreadPoolExecutor(max_workers=min(parallelism, len(unique))) as pool:
            futures = {
                url: pool.submit(
                    validate_url,
                    url,
                    timeout,
                    follow_redirects=follow_redirects,
                    session=session,
                )
                for url in unique
            }
            by_url: Dict[str, ValidationResult] = {url: f.result() for url, f in futures.items()}
    finally:
        session.close()
    return [by_url[url] for url in urls]


def filter_valid(results: Sequence[ValidationResult]) -> List[str]:
    """Exactly the URLs whose result is valid, in result order."""
    return [r.url for r in results if r.status == VALID]
