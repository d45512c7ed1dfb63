"""Shared test utilities: graph builders and an independent structure oracle."""

from dfgen.graph import DataflowGraph

# one legal terminal surface per semantic type, distinct across types so
# rendering collisions cannot hide behind identical filler text
_FILLERS = {
    "Int": "3",
    "Count": "4",
    "Time": "09:00",
    "Date": "2024-01-05",
    "DayOfWeek": "Monday",
    "BookDay": "Tuesday",
    "Bool": "true",
    "Person": "Dan",
    "PersonSet": "Dan",
    "Location": "room 1",
    "Str": "get together",
    "RestaurantName": "city stop restaurant",
    "Food": "spanish",
    "Area": "centre",
    "PriceRange": "cheap",
    "HotelName": "acorn guest house",
    "Station": "cambridge",
}


def filler_for(type_name: str) -> str:
    return _FILLERS.get(type_name, f"some {type_name.lower()}")


def one_level_graph(fn_name: str, registry) -> DataflowGraph:
    """The function applied to one legal terminal per declared slot."""
    sig = registry.function(fn_name)
    g = DataflowGraph()
    inputs = {}
    if sig.variadic:
        inputs["arg0"] = g.add_terminal(filler_for(sig.slots[0].type))
        inputs["arg1"] = g.add_terminal(filler_for(sig.slots[0].type))
    else:
        for spec in sig.slots:
            inputs[spec.name] = g.add_terminal(filler_for(spec.type))
    g.root = g.add_call(fn_name, inputs)
    return g


def masked_tree(graph: DataflowGraph, registry, nid=None):
    """Independent structure oracle: nested tuples, terminals blanked,
    commutative and variadic children compared as sorted multisets."""
    nid = graph.root if nid is None else nid
    node = graph.nodes[nid]
    if node.terminal:
        return "_"
    sig = registry.function(node.payload)
    name = registry.canonical_name(node.payload)
    kids = [(slot, masked_tree(graph, registry, child))
            for slot, child in node.inputs.items()]
    if sig is not None and (sig.commutative or sig.variadic):
        return (name, tuple(sorted((tree for _, tree in kids), key=repr)))
    return (name, tuple(sorted(kids, key=lambda kv: kv[0])))
