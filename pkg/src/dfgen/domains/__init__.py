"""Embedded domains: a restaurant dialogue domain and a calendar domain.

Each domain bundles a function registry, fixture data, and NL templates,
loaded from the JSON files shipped under dfgen/data.
"""

from importlib import resources

from ..types import Registry


def data_path(name: str):
    """Path-like handle to a packaged data file."""
    return resources.files("dfgen").joinpath("data", name)


def combined_registry() -> Registry:
    """Union registry over both shipped domains, for domain-agnostic tools
    (dedupe, round-trip checks).  Function name sets are disjoint; shared
    type names carry identical parents, so merging is conflict-free."""
    from . import multiwoz, smcal

    a = multiwoz.load_registry()
    b = smcal.load_registry()
    merged = Registry()
    seen_types: set[str] = set()
    for reg in (a, b):
        for t in reg.type_items():
            if t[0] not in seen_types:
                merged.add_type(*t)
                seen_types.add(t[0])
    for reg in (a, b):
        for name in reg.function_names():
            merged.add_function(reg.function(name), aliases=reg.aliases_of(name))
    for reg in (a, b):
        for name in reg.function_names():
            hook = reg.dynamic_return(name)
            if hook is not None:
                merged.set_dynamic_return(name, hook)
    return merged
