"""The fixed depression/anxiety assessment network topology.

Two binary condition nodes drive fifteen 4-state symptom-severity nodes
(eight depression, seven anxiety), a small set of literature-informed
inter-symptom edges, and one 4-state quartile observation node per retained
surrogate predictor. Surrogate nodes are leaves: children of the symptom
they predict.
"""

from __future__ import annotations

from .graph import NetworkSpec, NodeSpec

DEPRESSION = "Depression"
ANXIETY = "Anxiety"
CONDITIONS = (DEPRESSION, ANXIETY)
CONDITION_STATES = ("absent", "present")
SEVERITY_STATES = ("0", "1", "2", "3")

DEPRESSION_SYMPTOMS = (
    "Anhedonia",
    "LowMood",
    "Sleep",
    "LowEnergy",
    "Appetite",
    "Worthlessness",
    "Concentration",
    "Psychomotor",
)
ANXIETY_SYMPTOMS = (
    "Nervousness",
    "UncontrollableWorry",
    "ExcessiveWorry",
    "TroubleRelaxing",
    "Restlessness",
    "Irritability",
    "Dread",
)
SYMPTOMS = DEPRESSION_SYMPTOMS + ANXIETY_SYMPTOMS

SYMPTOM_CONDITION = {s: DEPRESSION for s in DEPRESSION_SYMPTOMS}
SYMPTOM_CONDITION.update({s: ANXIETY for s in ANXIETY_SYMPTOMS})

INTER_SYMPTOM_EDGES = (
    ("LowEnergy", "Anhedonia"),
    ("Worthlessness", "LowMood"),
    ("Appetite", "LowEnergy"),
    ("TroubleRelaxing", "Restlessness"),
    ("Psychomotor", "Restlessness"),
    ("TroubleRelaxing", "Concentration"),
)

_SLUG = {
    "Anhedonia": "anhedonia",
    "LowMood": "low-mood",
    "Sleep": "sleep",
    "LowEnergy": "low-energy",
    "Appetite": "appetite",
    "Worthlessness": "worthlessness",
    "Concentration": "concentration",
    "Psychomotor": "psychomotor",
    "Nervousness": "nervousness",
    "UncontrollableWorry": "uncontrollable-worry",
    "ExcessiveWorry": "excessive-worry",
    "TroubleRelaxing": "trouble-relaxing",
    "Restlessness": "restlessness",
    "Irritability": "irritability",
    "Dread": "dread",
}

# (symptom, feature family, reference discrimination strength) for every
# retained surrogate predictor; strengths double as synthetic-data targets.
SURROGATE_TABLE = (
    ("Anhedonia", "mood-audio", 0.674),
    ("Anhedonia", "mood-linguistic", 0.715),
    ("LowMood", "mood-audio", 0.712),
    ("LowMood", "mood-linguistic", 0.779),
    ("Sleep", "reading-MM", 0.620),
    ("Sleep", "mood-audio", 0.662),
    ("Sleep", "mood-linguistic", 0.684),
    ("LowEnergy", "reading-MM", 0.634),
    ("LowEnergy", "mood-audio", 0.692),
    ("LowEnergy", "mood-linguistic", 0.724),
    ("Appetite", "reading-MM", 0.620),
    ("Worthlessness", "mood-audio", 0.691),
    ("Worthlessness", "mood-linguistic", 0.746),
    ("Concentration", "reading-MM", 0.601),
    ("Concentration", "mood-audio", 0.649),
    ("Psychomotor", "reading-MM", 0.638),
    ("Psychomotor", "mood-audio", 0.680),
    ("Nervousness", "mood-audio", 0.709),
    ("Nervousness", "mood-linguistic", 0.742),
    ("UncontrollableWorry", "mood-audio", 0.695),
    ("UncontrollableWorry", "mood-linguistic", 0.733),
    ("ExcessiveWorry", "mood-audio", 0.692),
    ("ExcessiveWorry", "mood-linguistic", 0.735),
    ("TroubleRelaxing", "reading-MM", 0.607),
    ("TroubleRelaxing", "mood-linguistic", 0.714),
    ("Restlessness", "reading-MM", 0.624),
    ("Restlessness", "mood-linguistic", 0.652),
    ("Irritability", "reading-MM", 0.623),
    ("Irritability", "mood-audio", 0.677),
    ("Dread", "mood-audio", 0.654),
    ("Dread", "mood-linguistic", 0.682),
)

SURROGATE_FAMILIES = ("reading-MM", "mood-audio", "mood-linguistic")


def surrogate_node(symptom: str, family: str) -> str:
    return f"{_SLUG[symptom]}-{family}"


SURROGATES = tuple(surrogate_node(s, f) for s, f, _ in SURROGATE_TABLE)
SURROGATE_SYMPTOM = {surrogate_node(s, f): s for s, f, _ in SURROGATE_TABLE}
SURROGATE_FAMILY = {surrogate_node(s, f): f for s, f, _ in SURROGATE_TABLE}
SURROGATE_TARGET_AUC = {surrogate_node(s, f): auc for s, f, auc in SURROGATE_TABLE}


def symptom_surrogates(symptom: str) -> list[str]:
    return [n for n in SURROGATES if SURROGATE_SYMPTOM[n] == symptom]


def assessment_network(condition_edge: bool = True) -> NetworkSpec:
    """Build the full 48-node assessment topology.

    condition_edge controls the Depression -> Anxiety dependence edge;
    dropping it makes the two conditions a priori independent.
    """
    nodes = [NodeSpec(c, CONDITION_STATES) for c in CONDITIONS]
    nodes += [NodeSpec(s, SEVERITY_STATES) for s in SYMPTOMS]
    nodes += [NodeSpec(n, SEVERITY_STATES) for n in SURROGATES]

    edges: list[tuple[str, str]] = []
    if condition_edge:
        edges.append((DEPRESSION, ANXIETY))
    edges += [(SYMPTOM_CONDITION[s], s) for s in SYMPTOMS]
    edges += list(INTER_SYMPTOM_EDGES)
    edges += [(SURROGATE_SYMPTOM[n], n) for n in SURROGATES]
    return NetworkSpec(nodes=tuple(nodes), edges=tuple(edges))
