"""The 24 industry-group taxonomy: names, keywords and hypothesis sentences."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

EXPECTED_IG_COUNT = 24
KEYWORDS_PER_IG = 5

HYPOTHESIS_TEMPLATE = (
    "The previous sentence is about some aspects of {name} "
    "such as {k1} or {k2} or {k3} or {k4} or {k5}."
)


class RegistryConfigError(ValueError):
    pass


def hypothesis_text(name: str, keywords: tuple[str, ...]) -> str:
    """Render the hypothesis sentence for an IG (name lowercased)."""
    k1, k2, k3, k4, k5 = keywords
    return HYPOTHESIS_TEMPLATE.format(name=name.lower(), k1=k1, k2=k2, k3=k3, k4=k4, k5=k5)


@dataclass(frozen=True)
class IGProfile:
    name: str
    keywords: tuple[str, ...]

    @property
    def hypothesis(self) -> str:
        return hypothesis_text(self.name, self.keywords)


@dataclass(frozen=True)
class IGRegistry:
    profiles: tuple[IGProfile, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.profiles)

    def profile(self, name: str) -> IGProfile:
        for p in self.profiles:
            if p.name == name:
                return p
        raise KeyError(name)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def __len__(self) -> int:
        return len(self.profiles)

    def __iter__(self):
        return iter(self.profiles)


def _build(entries: list[dict]) -> IGRegistry:
    if len(entries) != EXPECTED_IG_COUNT:
        raise RegistryConfigError(f"expected {EXPECTED_IG_COUNT} IGs, found {len(entries)}")
    profiles = []
    seen = set()
    for entry in entries:
        name = entry["name"]
        if name in seen:
            raise RegistryConfigError(f"duplicate IG name {name!r}")
        seen.add(name)
        keywords = [kw.strip().rstrip(".") for kw in entry["keywords"]]
        if len(keywords) != KEYWORDS_PER_IG or len(set(keywords)) != KEYWORDS_PER_IG:
            raise RegistryConfigError(
                f"IG {name!r} needs {KEYWORDS_PER_IG} distinct keywords, got {entry['keywords']}"
            )
        if any(not kw for kw in keywords):
            raise RegistryConfigError(f"IG {name!r} has an empty keyword")
        profiles.append(IGProfile(name=name, keywords=tuple(keywords)))
    return IGRegistry(profiles=tuple(profiles))


def load_registry(path=None) -> IGRegistry:
    """Load the IG config; the bundled default ships the standard 24-group set."""
    if path is None:
        text = resources.files("igtasks.data").joinpath("ig_groups.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    config = json.loads(text)
    registry = _build(config["groups"])
    if path is None:
        _check_keyword_uniqueness(registry)
    return registry


def _check_keyword_uniqueness(registry: IGRegistry) -> None:
    # The shipped default must assign every keyword to exactly one IG.
    owner: dict[str, str] = {}
    for profile in registry:
        for kw in profile.keywords:
            if kw in owner:
                raise RegistryConfigError(
                    f"keyword {kw!r} appears in both {owner[kw]!r} and {profile.name!r}"
                )
            owner[kw] = profile.name
