"""Brute-force reference implementations used only by tests.

These deliberately re-derive results by exhaustive search, independent of the
production code paths they check.
"""

from itertools import permutations

from framesem.kr import ConceptRef, Literal


def isa_closure_bruteforce(frames):
    """All (concept, ancestor) pairs, by naive fixpoint over IS-A lines."""
    edges = set()
    names = set()
    for f in frames:
        if f.kind != "concept":
            continue
        names.add(f.head.name)
        for filler in f.fillers("IS-A"):
            edges.add((f.head.name, filler.name))
    closure = {(n, n) for n in names} | set(edges)
    changed = True
    while changed:
        changed = False
        for a, b in list(closure):
            for c, d in edges:
                if b == c and (a, d) not in closure:
                    closure.add((a, d))
                    changed = True
    return closure


def all_inheritance_paths(frames, concept):
    """Every IS-A path from concept upward, as lists of concept names."""
    parents = {}
    for f in frames:
        if f.kind == "concept":
            parents[f.head.name] = [x.name for x in f.fillers("IS-A")]

    paths = []

    def walk(node, path):
        ps = parents.get(node, [])
        if not ps:
            paths.append(path)
            return
        for p in ps:
            walk(p, path + [p])

    walk(concept, [concept])
    return paths


def effective_slots_bruteforce(frames, concept):
    """Expected (property, facet) -> source mapping via explicit BFS layers.

    Re-derives the precedence contract: nearer ancestors win, ties broken by
    parent order in the IS-A line; IS-A itself is never inherited.
    """
    parents = {}
    local = {}
    for f in frames:
        if f.kind == "concept":
            parents[f.head.name] = [x.name for x in f.fillers("IS-A")]
            local[f.head.name] = f

    order = [concept]
    seen = {concept}
    layer = [concept]
    while layer:
        nxt = []
        for n in layer:
            for p in parents[n]:
                if p not in seen:
                    seen.add(p)
                    order.append(p)
                    nxt.append(p)
        layer = nxt

    winner = {}
    for source in order:
        for slot in local[source].slots:
            if slot.prop == "IS-A" and source != concept:
                continue
            pair = (slot.prop, slot.facet)
            if pair not in winner:
                winner[pair] = source
    return winner


def check_filler_bruteforce(frames, concept, prop, candidate):
    """Walk every facet line strongest-first over the expected effective
    slots; concept fillers match by closure membership, literals by equality."""
    closure = isa_closure_bruteforce(frames)
    winners = effective_slots_bruteforce(frames, concept)
    local = {f.head.name: f for f in frames if f.kind == "concept"}
    lines = []
    for (p, facet), source in winners.items():
        if p != prop:
            continue
        for slot in local[source].slots:
            if slot.prop == p and slot.facet == facet:
                lines.append(slot)
    lines.sort(key=lambda s: -s.facet.strength)
    for slot in lines:
        for filler in slot.fillers:
            if isinstance(filler, ConceptRef) and isinstance(candidate, str):
                if (candidate, filler.name) in closure:
                    return slot.facet
            if isinstance(filler, Literal) and isinstance(candidate, Literal):
                if filler == candidate:
                    return slot.facet
    return None


def agreement_match_bruteforce(feats_a, feats_b):
    """Exhaustive comparison of number/person/gender feature dicts; unknown
    gender is compatible with anything."""
    for key in ("number", "person"):
        if feats_a.get(key) and feats_b.get(key) and feats_a[key] != feats_b[key]:
            return False
    ga, gb = feats_a.get("gender", "unknown"), feats_b.get("gender", "unknown")
    if ga != "unknown" and gb != "unknown" and ga != gb:
        return False
    return True


def cky_enumerate_trees(text, lexicon):
    """Bottom-up CKY over the controlled grammar: every full-span S item,
    by exhaustive cell fixpoint. Independent of the production parser's
    memoized top-down search (the rule table is the shared contract)."""
    from framesem import morph
    from framesem.parser import RULES, _item_to_tree, _lexical_items, apply_rule

    all_tokens = morph.tokenize(text, lexicon.multiwords)
    sentences = morph.split_sentences(all_tokens)
    assert len(sentences) == 1
    terminator = None
    tokens = []
    for t in sentences[0]:
        if t.surface in morph.SENT_END:
            terminator = t.surface
        elif t.surface != ",":
            tokens.append(t)
    n = len(tokens)
    cells = {}
    for i, tok in enumerate(tokens):
        cells[(i, i + 1)] = list(_lexical_items(i, tok, morph.analyze(tok, lexicon)))

    def splits(i, j, k):
        if k == 1:
            yield [(i, j)]
            return
        for mid in range(i + 1, j - k + 2):
            for rest in splits(mid, j, k - 1):
                yield [(i, mid)] + rest

    for width in range(1, n + 1):
        for i in range(0, n - width + 1):
            j = i + width
            items = cells.setdefault((i, j), [])
            seen = {
                (it.cat, it.feats, it.edges, it.head, it.analyses) for it in items
            }
            changed = True
            while changed:
                changed = False
                for rule in RULES:
                    k = len(rule.rhs)
                    if k > width and k > 1:
                        continue
                    for span_list in splits(i, j, k):
                        child_lists = [
                            [it for it in cells.get(span, ()) if it.cat == sym]
                            for sym, span in zip(rule.rhs, span_list)
                        ]
                        if any(not lst for lst in child_lists):
                            continue
                        from itertools import product

                        for children in product(*child_lists):
                            item = apply_rule(rule, children)
                            if item is None:
                                continue
                            sig = (item.cat, item.feats, item.edges, item.head, item.analyses)
                            if sig not in seen:
                                seen.add(sig)
                                items.append(item)
                                changed = True

    want_question = terminator == "?"
    trees = []
    sigs = set()
    for item in cells.get((0, n), ()):  # full span
        if item.cat != "S":
            continue
        tree = _item_to_tree(item, tokens, text)
        if tree.interrogative != want_question:
            continue
        sig = tree.signature()
        if sig not in sigs:
            sigs.add(sig)
            trees.append(tree)
    return trees


def _oracle_form_ok(analysis, form):
    if form is None:
        return True
    return {
        "pastpart": analysis.participle == "past",
        "prespart": analysis.participle == "present",
        "base": analysis.tense is None and analysis.participle == "none",
        "finite": analysis.tense is not None,
    }[form]


def _oracle_predicate(tree, head, pattern, varmap):
    """Check one variable assignment against a (possibly rewritten) pattern,
    with its own edge bookkeeping. Core dependents must all be consumed."""
    from framesem.kr import Variable
    from framesem.matcher import CORE_LABELS

    def could_match(spec, used_now):
        """Some unused edge satisfies the constituent with some binding."""
        for label, dep in tree.dependents(head, spec.role):
            if dep in used_now:
                continue
            dep_node = tree.node(dep)
            if spec.form is not None and not _oracle_form_ok(dep_node.analysis, spec.form):
                continue
            if spec.role == "pp":
                prep = next((c for c in spec.children if c.role == "prep"), None)
                if prep is None or dep_node.lemma.lower() != str(prep.binding).lower():
                    continue
                if tree.dependent(dep, "obj") is None:
                    continue
            elif not isinstance(spec.binding, Variable) and spec.binding is not None:
                if dep_node.lemma.lower() != str(spec.binding).lower():
                    continue
            return True
        return False

    used = set()
    for spec in pattern.constituents:
        if spec.role == "v":
            node = tree.node(head)
            if not _oracle_form_ok(node.analysis, spec.form):
                return None
            if isinstance(spec.binding, Variable) and varmap.get(spec.binding.n) != head:
                return None
            continue
        var_of_spec = None
        if isinstance(spec.binding, Variable):
            var_of_spec = spec.binding.n
        elif spec.role == "pp":
            objc = next((c for c in spec.children if c.role == "obj"), None)
            if objc is not None and isinstance(objc.binding, Variable):
                var_of_spec = objc.binding.n
        if var_of_spec is not None and var_of_spec not in varmap:
            # an optional constituent may be skipped only when nothing
            # could have satisfied it (binding is greedy)
            if spec.optional and not could_match(spec, used):
                continue
            return None
        satisfied = False
        for label, dep in tree.dependents(head, spec.role):
            if dep in used:
                continue
            dep_node = tree.node(dep)
            if spec.form is not None and not _oracle_form_ok(dep_node.analysis, spec.form):
                continue
            if spec.role == "pp":
                prep = next((c for c in spec.children if c.role == "prep"), None)
                objc = next((c for c in spec.children if c.role == "obj"), None)
                if prep is None or dep_node.lemma.lower() != str(prep.binding).lower():
                    continue
                obj_node = tree.dependent(dep, "obj")
                if obj_node is None or objc is None:
                    continue
                if isinstance(objc.binding, Variable):
                    if varmap.get(objc.binding.n) != obj_node:
                        continue
                elif objc.binding is not None:
                    if tree.node(obj_node).lemma.lower() != str(objc.binding).lower():
                        continue
                else:
                    ok = True
                    for child in objc.children:
                        if child.role == "det":
                            det = tree.dependent(obj_node, "det")
                            if det is None or tree.node(det).lemma.lower() != str(
                                child.binding
                            ).lower():
                                ok = False
                        elif child.role == "n":
                            if tree.node(obj_node).lemma.lower() != str(
                                child.binding
                            ).lower():
                                ok = False
                    if not ok:
                        continue
            elif isinstance(spec.binding, Variable):
                if varmap.get(spec.binding.n) != dep:
                    continue
            elif spec.binding is not None:
                if dep_node.lemma.lower() != str(spec.binding).lower():
                    continue
            used.add(dep)
            satisfied = True
            break
        if not satisfied:
            if var_of_spec is not None:
                return None  # an assigned variable must be consumed
            if not spec.optional:
                return None
    core = [d for h, label, d in tree.edges if h == head and label in CORE_LABELS]
    if any(d not in used for d in core):
        return None
    return used


def bruteforce_match(sense, tree, head):
    """senses x all chains (length <= 2, any order) x all injective variable
    assignments, filtered by the pattern predicate."""
    from itertools import permutations

    from framesem.kr import Variable
    from framesem.matcher import (
        TRANSFORMATIONS,
        Inapplicable,
        apply_transformation,
        base_pattern,
    )

    head_node = tree.node(head)
    anchored = False
    if sense.lemma != head_node.lemma.lower():
        lits = [l.lower() for l in sense.anchor_literals()]
        deps = [tree.node(d).lemma.lower() for _, d in tree.dependents(head)]
        if not lits or not any(l in deps for l in lits):
            return set()
        anchored = True

    chains = [()]
    chains += [(t,) for t in TRANSFORMATIONS]
    chains += list(permutations(TRANSFORMATIONS, 2))

    # pattern variables only ever bind the head, its dependents, or the obj
    # of a pp dependent; restricting the enumeration keeps it exhaustive
    # over the reachable assignments while staying desk-scale
    reachable = {head}
    for _, d in tree.dependents(head):
        reachable.add(d)
        obj = tree.dependent(d, "obj")
        if obj is not None:
            reachable.add(obj)
    nodes = sorted(reachable)
    found = set()
    for chain in chains:
        if anchored and chain:
            continue
        pattern = base_pattern(sense)
        try:
            for t in chain:
                pattern = apply_transformation(t, pattern)
        except Inapplicable:
            continue
        if pattern.requires_conj_target and not any(
            label == "conj" and d == head for _, label, d in tree.edges
        ):
            continue
        variables = []

        def walk(cons):
            for c in cons:
                if isinstance(c.binding, Variable):
                    variables.append((c.binding.n, c.optional))
                walk(c.children)

        walk(pattern.constituents)
        required = [n for n, opt in variables if not opt]
        optional = [n for n, opt in variables if opt]

        def assignments(var_list):
            if not var_list:
                yield {}
                return
            first, *rest = var_list
            for sub in assignments(rest):
                for node in nodes:
                    if node not in sub.values():
                        yield {first: node, **sub}

        for drop in range(len(optional) + 1):
            from itertools import combinations

            for dropped in combinations(optional, drop):
                vars_now = [n for n in required + optional if n not in dropped]
                for varmap in assignments(vars_now):
                    if _oracle_predicate(tree, head, pattern, varmap) is not None:
                        canonical = tuple(
                            sorted(chain, key=TRANSFORMATIONS.index)
                        )
                        found.add(
                            (
                                sense.id,
                                canonical,
                                tuple(sorted(varmap.items())),
                                pattern.controlled,
                                pattern.wh_var,
                            )
                        )
    return found


def habit_groups_bruteforce(event_rows, min_count):
    """event_rows: (agent, concept, trigger, theme_concept). Returns the
    set of (agent, concept, trigger) groups meeting the support threshold,
    by enumerating all possible groupings."""
    groups = {}
    for agent, concept, trigger, theme in event_rows:
        if trigger is None:
            continue
        groups.setdefault((agent, concept, trigger), []).append(theme)
    return {k: v for k, v in groups.items() if len(v) >= min_count}
