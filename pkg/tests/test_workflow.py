"""User-workflow scenarios on trained models, plus environment plumbing."""

import json

from morphoglot.cli import build_parser, main, resolve_config
from morphoglot.metrics import corpus_mer


class TestAddMissingMorphemeWorkflow:
    """Adding an absent gold morpheme repairs affected sentences."""

    def test_single_user_addition_repairs_sole_error_sentences(self, oov_model):
        from morphoglot.igt import Corpus

        pipeline = oov_model.pipeline
        bundle = oov_model.bundle
        train_keys = pipeline.lexicon.keys()

        # morpheme types missing from the train lexicon, frequent first
        counts = {}
        for sentence in bundle.eval:
            for m in sentence.morphemes():
                if m.key not in train_keys:
                    counts[m] = counts.get(m, 0) + 1
        assert counts, "the OOV benchmark must contain unseen morphemes"
        candidates = sorted(counts, key=lambda m: (-counts[m], m.key))

        before_pred, _ = pipeline.gloss_corpus(bundle.eval)
        before = corpus_mer(bundle.eval, before_pred, "gloss").per_sentence

        # engineer the demonstration: find a missing type whose addition
        # repairs at least one of the sentences where it is the sole gap,
        # without hurting any of them
        demonstrated = False
        for missing in candidates[:5]:
            sole_error = [
                i for i, s in enumerate(bundle.eval)
                if any(m.key == missing.key for m in s.morphemes())
                and all(m.key in train_keys or m.key == missing.key
                        for m in s.morphemes())
            ]
            if not sole_error:
                continue
            work = pipeline.lexicon.copy()
            _, added = work.add_entry(missing, "user", pipeline.encoder)
            assert added
            subset = Corpus(tuple(bundle.eval.sentences[i] for i in sole_error), "test")
            after_pred, _ = pipeline.gloss_corpus(subset, lexicon=work)
            after = corpus_mer(subset, after_pred, "gloss").per_sentence
            befores = [before[i] for i in sole_error]
            if all(a <= b + 1e-12 for a, b in zip(after, befores)) and sum(after) < sum(befores):
                demonstrated = True
                break
        assert demonstrated, "no candidate addition repaired its sole-error sentences"
        # the session lexicon itself was never touched
        assert all(m.key not in pipeline.lexicon.keys() for m in candidates)


class TestEnvironmentPlumbing:
    def test_morphoglot_config_env(self, tmp_path, monkeypatch):
        path = tmp_path / "env.cfg"
        path.write_text("[encoder]\nepochs = 3\n\n[run]\nseed = 42\n")
        monkeypatch.setenv("MORPHOGLOT_CONFIG", str(path))
        parser = build_parser()
        args = parser.parse_args(["train-encoder", "--train", "x", "--out", "y"])
        config = resolve_config(args)
        assert config.enc_epochs == 3
        assert config.seed == 42

    def test_flag_overrides_env_config(self, tmp_path, monkeypatch):
        path = tmp_path / "env.cfg"
        path.write_text("[encoder]\nepochs = 3\n")
        monkeypatch.setenv("MORPHOGLOT_CONFIG", str(path))
        parser = build_parser()
        args = parser.parse_args([
            "train-encoder", "--set", "enc_epochs=9", "--train", "x", "--out", "y",
        ])
        assert resolve_config(args).enc_epochs == 9

    def test_sectionless_synth_spec_file(self, tmp_path):
        spec_file = tmp_path / "lang.cfg"
        spec_file.write_text("stem_count = 4\nn_slots = 1\naffixes_per_slot = 2\n")
        out = tmp_path / "c.txt"
        assert main(["synth", "--spec", str(spec_file), "--sentences", "5",
                     "--out", str(out)]) == 0
        meta = json.loads((tmp_path / "c.txt.meta.json").read_text())
        assert meta["synth_sentences"] == 5
