import json

import pytest

from igtasks.registry import (IGProfile, RegistryConfigError, hypothesis_text,
                              load_registry)


def test_default_registry_shape(registry):
    assert len(registry) == 24
    assert len(set(registry.names)) == 24
    for profile in registry:
        assert len(profile.keywords) == 5


def test_banks_keywords(registry):
    assert registry.profile("Banks").keywords == (
        "loan", "mortgage", "accounts", "payment", "money")


def test_real_estate_hypothesis(registry):
    assert registry.profile("Real Estate").hypothesis == (
        "The previous sentence is about some aspects of real estate "
        "such as rent or house or residential or apartment or homeowner.")


def test_energy_hypothesis(registry):
    assert registry.profile("Energy").hypothesis == (
        "The previous sentence is about some aspects of energy "
        "such as oil or electricity or coal or renewable or solar.")


def test_banks_hypothesis_suffix(registry):
    assert registry.profile("Banks").hypothesis.endswith(
        "such as loan or mortgage or accounts or payment or money.")


def test_hypothesis_contains_name_and_keywords(registry):
    for profile in registry:
        hyp = profile.hypothesis
        assert profile.name.lower() in hyp
        for kw in profile.keywords:
            assert kw in hyp


def test_hypothesis_deterministic(registry):
    fresh = load_registry()
    for a, b in zip(registry, fresh):
        assert a.hypothesis == b.hypothesis


def test_keywords_unique_across_default_config(registry):
    seen = {}
    for profile in registry:
        for kw in profile.keywords:
            assert kw not in seen, f"{kw} in both {seen.get(kw)} and {profile.name}"
            seen[kw] = profile.name


def _write_config(tmp_path, groups):
    path = tmp_path / "igs.json"
    path.write_text(json.dumps({"groups": groups}))
    return path


def test_wrong_count_rejected(tmp_path, registry):
    groups = [{"name": p.name, "keywords": list(p.keywords)} for p in registry][:23]
    with pytest.raises(RegistryConfigError, match="expected 24 IGs, found 23"):
        load_registry(_write_config(tmp_path, groups))


def test_duplicate_name_rejected(tmp_path, registry):
    groups = [{"name": p.name, "keywords": list(p.keywords)} for p in registry]
    groups[0]["name"] = "Energy"
    with pytest.raises(RegistryConfigError, match="duplicate IG name"):
        load_registry(_write_config(tmp_path, groups))


def test_keyword_count_enforced(tmp_path, registry):
    groups = [{"name": p.name, "keywords": list(p.keywords)} for p in registry]
    groups[3]["keywords"] = groups[3]["keywords"][:4]
    with pytest.raises(RegistryConfigError, match=groups[3]["name"]):
        load_registry(_write_config(tmp_path, groups))


def test_trailing_punctuation_stripped(registry):
    # Two source keyword lists end with a period; the loader strips it.
    assert "casino" in registry.profile("Consumer Services").keywords
    assert "satellites" in registry.profile("Capital Goods").keywords
    for profile in registry:
        for kw in profile.keywords:
            assert not kw.endswith(".")


def test_hypothesis_text_template():
    profile = IGProfile(name="Banks", keywords=("a", "b", "c", "d", "e"))
    assert hypothesis_text(profile.name, profile.keywords) == (
        "The previous sentence is about some aspects of banks "
        "such as a or b or c or d or e.")
