"""Deterministic synthetic AMR/sentence corpus for desk-scale training.

Template-generated graphs with a small shared vocabulary; some templates
introduce reentrancies (control verbs) so the structural machinery is
exercised. The same seed always produces the same corpus.
"""

from __future__ import annotations

import numpy as np

AGENTS = ["boy", "girl", "dog", "teacher", "doctor", "farmer"]
PATIENTS = ["cat", "book", "ball", "house", "tree", "letter"]
VERBS = {
    "see-01": "sees",
    "chase-01": "chases",
    "like-01": "likes",
    "find-01": "finds",
    "read-01": "reads",
}
INFINITIVES = {
    "see-01": "see",
    "chase-01": "chase",
    "like-01": "like",
    "find-01": "find",
    "read-01": "read",
}
MODS = ["little", "big", "red", "old"]


def _simple(verb, agent, patient):
    graph = (
        f"(v / {verb} :ARG0 (a / {agent}) :ARG1 (p / {patient}))"
    )
    sentence = f"the {agent} {VERBS[verb]} the {patient} ."
    return graph, sentence


def _modified(verb, agent, patient, mod):
    graph = (
        f"(v / {verb} :ARG0 (a / {agent} :mod (m / {mod})) :ARG1 (p / {patient}))"
    )
    sentence = f"the {mod} {agent} {VERBS[verb]} the {patient} ."
    return graph, sentence


def _control(verb, agent, patient):
    # reentrancy: the agent of want-01 is also the agent of the inner verb
    graph = (
        f"(w / want-01 :ARG0 (a / {agent}) "
        f":ARG1 (v / {verb} :ARG0 a :ARG1 (p / {patient})))"
    )
    sentence = f"the {agent} wants to {INFINITIVES[verb]} the {patient} ."
    return graph, sentence


def _possible(verb, agent, patient):
    graph = (
        f"(x / possible :domain (v / {verb} :ARG0 (a / {agent}) "
        f":ARG1 (p / {patient})))"
    )
    sentence = f"the {agent} can {INFINITIVES[verb]} the {patient} ."
    return graph, sentence


TEMPLATES = (_simple, _modified, _control, _possible)


def generate_corpus(count: int = 100, seed: int = 13) -> list[tuple[str, str]]:
    """Return ``count`` (penman, sentence) pairs, deterministically."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        template = TEMPLATES[rng.integers(len(TEMPLATES))]
        verb = list(VERBS)[rng.integers(len(VERBS))]
        agent = AGENTS[rng.integers(len(AGENTS))]
        patient = PATIENTS[rng.integers(len(PATIENTS))]
        if template is _modified:
            mod = MODS[rng.integers(len(MODS))]
            out.append(template(verb, agent, patient, mod))
        else:
            out.append(template(verb, agent, patient))
    return out


def write_corpus(path: str, count: int = 100, seed: int = 13) -> None:
    pairs = generate_corpus(count, seed)
    with open(path, "w", encoding="utf-8") as fh:
        for penman, sentence in pairs:
            fh.write(f"# ::snt {sentence}\n{penman}\n\n")


# PENMAN text for the running example graph: "He could be sentenced to
# 7 years in prison if convicted."
FIG1_PENMAN = """\
(p / possible
  :domain (s / sentence-01
    :ARG1 (h / he)
    :ARG2 (t / temporal-quantity
      :quant 7
      :unit (y / year))
    :location (p2 / prison)
    :condition (c / convict-01
      :ARG1 h
      :time (b / before
        :op1 (n / now)))))
"""

FIG1_SENTENCE = "He could be sentenced to 7 years in prison if convicted ."
