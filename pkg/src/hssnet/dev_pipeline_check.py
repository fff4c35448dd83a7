from __future__ import annotations

from pathlib import Path
import tempfile

from .data import ClipRepository, SynthSpec, generate_corpus, generate_pair
from .train import evaluate_predictions


def main() -> None:
    spec = SynthSpec().scaled(64)
    with tempfile.TemporaryDirectory() as tmpdir:
        repo = ClipRepository.open(Path(tmpdir) / "clips")
        for record in generate_corpus(spec, 4, base_seed=7):
            repo.save(record)
        for record in generate_pair(spec, 11, pair_id="pair"):
            repo.save(record, spec)

        records = repo.load_all()
        assert len(records) == 6, "Expected every stored clip to reload"
        oracle = [(record.ed_mask, record.es_mask) for record in records]
        result = evaluate_predictions(records, oracle)
        assert result.segmentation.dice == 1.0
        assert result.segmentation.hd95 == 0.0
        assert result.ef is not None and abs(result.ef.bias) < 1e-12
        assert result.ef_missing == 0


if __name__ == "__main__":
    main()
