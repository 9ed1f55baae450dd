#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes the scripted fixture inputs under fixtures/.

Goldens and reference transcripts are not written here; produce them with
`musa check-fixtures --root fixtures --update`.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
MARK = "NO_FURTHER_IMPROVEMENT"


def dump(path, value):
    path = ROOT / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(value, indent=2, sort_keys=True) + "\n")


def jsonl(path, rows):
    path = ROOT / path
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))


def plan_block(actions, rationale):
    body = {"actions": [{"id": i, "instructions": text} for i, text in actions], "rationale": rationale}
    return "```plan\n" + json.dumps(body, indent=2) + "\n```"


def mock(model, script=None, by_task=None, images=False, embedding=None):
    m = {"script": script or [], "scripts_by_task": by_task or {}, "embedding_dim": 64, "seed": 7}
    if embedding:
        m.update(embedding)
    return {"backend": "mock", "model_name": model, "supports_images": images, "mock": m}


OPT_CYCLE = ["Forward pass: the candidate addresses the task.",
             "Evaluation: the candidate is adequate; wording could be tighter.",
             "Feedback: keep the content, tighten the wording."]


def engine(bindings, strategy="none", trials=1, iterations=1, **extra):
    cfg = {"theta": 0.1, "trials": trials, "tgd_iterations": iterations,
           "plan_strategy": strategy, "act_strategy": strategy, "role_bindings": bindings}
    cfg.update(extra)
    return cfg


def eval_config(action_id, instructions, actor_scripts, act_step=None, **extra):
    plan = plan_block([(action_id, instructions)], "A single action covers the task.")
    optimizer = OPT_CYCLE + [plan] + OPT_CYCLE + [act_step or MARK]
    return engine({
        "RoleWriter": mock("writer-model", ["You are a careful analyst of social media content."]),
        "Reasoner": mock("reasoner-model"),
        "Planner": mock("planner-model", ["The task needs one action.\n" + plan]),
        "Optimizer": mock("optimizer-model", optimizer),
        "Critic": mock("critic-model"),
        "Refiner": mock("refiner-model"),
        "Actor": mock("actor-model", by_task=actor_scripts, images=True),
    }, **extra)


def qa():
    rows = [
        {"id": "qa-1", "question": "Which city hosted the community cleanup mentioned in the post?",
         "text": "Post: Huge thanks to everyone who joined the river cleanup in Lyon this Saturday!",
         "gold": "Lyon"},
        {"id": "qa-2", "question": "How many volunteers does the post report?",
         "text": "Post: 120 volunteers planted trees along the canal path today.", "gold": "120"},
        {"id": "qa-3", "question": "What product is the thread complaining about?",
         "text": "Thread: The new Aurora headphones keep disconnecting after the update.",
         "gold": "the Aurora headphones"},
        {"id": "qa-4", "question": "Which day is the bake sale?",
         "text": "Post: Our school bake sale moves to Friday because of the rain forecast.", "gold": "Friday"},
        {"id": "qa-5", "question": "Who organised the charity run?",
         "text": "Post: The Riverside Running Club organised a charity run for the food bank.",
         "gold": "Riverside Running Club"},
    ]
    actor = {
        "qa-1": ["ANSWER: Lyon, France", "ANSWER: Lyon"],
        "qa-2": ["ANSWER: 120 volunteers", "ANSWER: 120 volunteers"],
        "qa-3": ["ANSWER: Aurora headphones", "The thread is about the Aurora headphones."],
        "qa-4": ["ANSWER: Friday"],
        "qa-5": ["ANSWER: the food bank", "ANSWER: the food bank"],
    }
    jsonl("qa/dataset.jsonl", rows)
    dump("qa/config.json", eval_config(1, "Answer the question from the post text.", actor))


def title():
    rows = [
        {"id": "t-1", "text": "City council approves new bike lanes on Main Street after months of debate.",
         "gold": "Council approves Main Street bike lanes"},
        {"id": "t-2", "text": "Local bakery wins national award for its sourdough bread.",
         "gold": "Local bakery wins national sourdough award"},
        {"id": "t-3", "text": "Heavy snow closes mountain roads; drivers urged to stay home.",
         "gold": "Snow closes mountain roads"},
        {"id": "t-4", "text": "Students build a solar powered boat for the regional science fair.",
         "image": "images/boat.jpg", "gold": "Students build solar boat for science fair"},
        {"id": "t-5", "text": "Museum reopens after renovation with a new dinosaur hall.",
         "gold": "Museum reopens with new dinosaur hall"},
    ]
    actor = {
        "t-1": ["TITLE: Council approves bike lanes", "TITLE: Council approves Main Street bike lanes"],
        "t-2": ["TITLE: Bakery wins award", "TITLE: Bakery wins national sourdough award"],
        "t-3": ["TITLE: Mountain roads closed by snow", "TITLE: Mountain roads closed by heavy snow"],
        "t-4": ["TITLE: Solar boat at science fair", "TITLE: Students build a solar boat"],
        "t-5": ["TITLE: New dinosaur hall", "TITLE: Museum reopens with new dinosaur hall"],
    }
    jsonl("title/dataset.jsonl", rows)
    dump("title/config.json", eval_config(3, "Write a short headline for the post.", actor))


def categorize():
    dump("categorize/taxonomy.json", {
        "version": 1,
        "level1": ["sport", "politics", "technology"],
        "level2": {"sport": ["tennis", "football"], "politics": ["elections", "policy"],
                   "technology": ["ai", "gadgets"]},
    })
    rows = [
        ("c-1", "Underdog takes the title after a five-set final at the grass court championship.", "sport", "tennis"),
        ("c-2", "Late penalty sends the home side through to the cup semi-final.", "sport", "football"),
        ("c-3", "Turnout hits a record high as polls close in the mayoral race.", "politics", "elections"),
        ("c-4", "Parliament passes the housing bill after a long committee stage.", "politics", "policy"),
        ("c-5", "New language model writes code from plain-English descriptions.", "technology", "ai"),
        ("c-6", "Foldable phone review: a great screen, a weak battery.", "technology", "gadgets"),
    ]
    jsonl("categorize/dataset.jsonl", [{"id": i, "text": t, "gold": {"level1": a, "level2": b}} for i, t, a, b in rows])
    predictions = {
        "c-1": ("sport", "tennis", "sport", "tennis"),
        "c-2": ("sport", "tennis", "sport", "football"),
        "c-3": ("politics", "elections", "politics", "elections"),
        "c-4": ("politics", "elections", "politics", "elections"),
        "c-5": ("technology", "gadgets", "technology", "ai"),
        "c-6": ("technology", "gadgets", "sport", "football"),
    }
    actor = {k: [f"CATEGORY: {v[0]}", f"CATEGORY: {v[1]}", f"CATEGORY: {v[2]}", f"CATEGORY: {v[3]}"]
             for k, v in predictions.items()}
    dump("categorize/config.json",
         eval_config(4, "Classify the post into a category and a sub-category.", actor, taxonomy="taxonomy.json"))


def tools():
    dump("tools/knowledge.json", {
        "version": 1,
        "entries": [
            {"id": "hashtags", "title": "Hashtag conventions",
             "facts": ["Hashtags group posts by topic.", "Campaign hashtags usually carry the organiser's name."]},
            {"id": "misinfo", "title": "Health misinformation signals",
             "facts": ["Claims of a miracle cure are a common misinformation pattern.",
                       "Posts citing no source for medical advice warrant verification."]},
            {"id": "events", "title": "Community events",
             "facts": ["Community clean-ups are usually announced a week ahead."]},
        ],
    })


TASK = {
    "task": {
        "id": "example",
        "goal": "Check whether the post spreads health misinformation and answer yes or no.",
        "inputs": [{"kind": "text", "text": "Post: This herbal tea is a miracle cure for the flu! #naturalhealth"},
                   {"kind": "image", "image": {"location": "images/tea.jpg", "media_type": "image/jpeg"}}],
        "allowed_actions": None,
    },
    "environment": {"description": "Social media posts about public health.", "knowledge_refs": ["misinfo"]},
}


def scenario_config(trials, fire, strategy="car"):
    plan_a = plan_block([(1, "KNOWLEDGE: miracle cure\nDecide whether the post makes an unsupported health claim.")],
                        "A QA pass with background knowledge answers the question.")
    plan_b = plan_block([(3, "Summarise the post in a headline.")], "A headline captures the claim.") if fire else plan_a
    replanned = plan_block([(1, "KNOWLEDGE: miracle cure\nDecide whether the post claims a cure without a source.")],
                           "The corrective instructions ask for a sourced-claim check.")
    reasoner = ["Trace: the post names a cure and cites nothing.", "Reflection: the trace is sound; check sources."]
    optimizer = OPT_CYCLE + [plan_b]
    planner = ["Deliberation done.\n" + plan_a]
    reason_calls = 2 if strategy in ("car", "reflection") else 0
    reasoner_script = reasoner * (trials + 1) if reason_calls else []
    if fire and trials > 1:
        planner.append("Revised.\n" + replanned)
        optimizer += OPT_CYCLE + [replanned]
    optimizer += OPT_CYCLE + ["yes: the miracle-cure claim has no source. " + MARK]
    critic = mock("critic-model", ["VERDICT: A\nFEEDBACK:\nPlan B drops the question; keep QA and ask for the claim's source."],
                  embedding={"embedding_dim": 2,
                             "embedding_overrides": [{"match": "\"QA\"", "vector": [4.0, 0.0]},
                                                     {"match": "TitleGeneration", "vector": [0.0, 4.0]}]})
    return engine({
        "RoleWriter": mock("writer-model", ["You are a public-health content analyst."]),
        "Reasoner": mock("reasoner-model", reasoner_script),
        "Planner": mock("planner-model", planner),
        "Optimizer": mock("optimizer-model", optimizer),
        "Critic": critic,
        "Refiner": mock("refiner-model", ["Plan one QA action that checks whether the cure claim cites a source."]),
        "Actor": mock("actor-model", ["ANSWER: yes", "ANSWER: yes"], images=True),
    }, strategy=strategy, trials=trials, tool_store="../tools/knowledge.json")


def scenarios():
    dump("tasks/example.task", TASK)
    dump("scenarios/gate_pass.json", scenario_config(2, fire=False))
    dump("scenarios/gate_fire.json", scenario_config(2, fire=True))
    dump("scenarios/single_trial.json", scenario_config(1, fire=False))
    dump("solve/config.json", scenario_config(2, fire=True))


def manifest():
    path = ROOT / "manifest.json"
    old = json.loads(path.read_text()) if path.exists() else {}
    hashes = {d["name"]: d.get("golden_sha256", "") for d in old.get("datasets", []) + old.get("runs", [])}
    dump("manifest.json", {
        "version": 1,
        "datasets": [
            {"name": n, "kind": k, "format": "native", "dataset": f"{n}/dataset.jsonl", "config": f"{n}/config.json",
             "golden": f"{n}/golden.report", "golden_sha256": hashes.get(n, "")}
            for n, k in (("qa", "qa"), ("title", "title"), ("categorize", "categorize"))
        ],
        "runs": [{"name": "solve", "config": "solve/config.json", "task": "tasks/example.task",
                  "golden": "solve/golden.report", "golden_sha256": hashes.get("solve", "")}],
        "scenarios": [{"name": n, "config": f"scenarios/{n}.json", "task": "tasks/example.task",
                       "reference": f"scenarios/{n}.transcript"} for n in ("gate_pass", "gate_fire", "single_trial")],
        "taxonomies": ["categorize/taxonomy.json"],
        "tool_stores": ["tools/knowledge.json"],
        "tasks": ["tasks/example.task"],
    })


if __name__ == "__main__":
    qa()
    title()
    categorize()
    tools()
    scenarios()
    manifest()
