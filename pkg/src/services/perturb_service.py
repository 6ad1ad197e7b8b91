from pathlib import Path
from typing import List, Optional, Union
from tqdm import tqdm
from ..augment.policy import apply_policy
from ..core.seeding import derive_seed
from ..dataset.anymap import write_sample
from ..dataset.loader import MANIFEST_NAME, load_entry, load_manifest, split_entries
from ..dataset.generator import SPLIT_INDEX
from ..models.augment_schema import Disturbance, DisturbancePolicy, PerturbSidecar
from ..models.errors import DatasetError

PathLike = Union[str, Path]

SIDECAR_NAME = "perturbation.json"


def perturb_dataset(
    source: PathLike,
    destination: PathLike,
    disturbance: Disturbance,
    policy: DisturbancePolicy,
    seed: int = 0,
    splits: Optional[List[str]] = None,
    quiet: bool = False,
) -> PerturbSidecar:
    """
    Writes a disturbed copy of a dataset. Labels are copied unchanged; the
    manifest keeps its relative paths, and a sidecar records what was applied.
    """

    source, destination = Path(source), Path(destination)
    if source.resolve() == destination.resolve():
        raise DatasetError("Refusing to perturb a dataset in place.", details=str(source))

    manifest = load_manifest(source)
    splits = splits or sorted(manifest.splits)
    kept = {}
    for split in splits:
        entries = split_entries(manifest, split)
        split_key = SPLIT_INDEX.get(split, len(SPLIT_INDEX))
        for index, entry in enumerate(tqdm(entries, desc=f"Perturb {split}", disable=quiet)):
            sample = load_entry(source, entry, manifest)
            disturbed = apply_policy(sample, policy, disturbance, derive_seed(seed, split_key, index))
            write_sample(destination / split / entry.sample_id, disturbed, manifest.num_classes)
        kept[split] = entries

    destination.mkdir(parents=True, exist_ok=True)
    perturbed = manifest.model_copy(update={"splits": kept})
    (destination / MANIFEST_NAME).write_text(perturbed.model_dump_json(indent=2))
    sidecar = PerturbSidecar(
        source=str(source), disturbance=disturbance, policy=policy, seed=seed, splits=splits
    )
    (destination / SIDECAR_NAME).write_text(sidecar.model_dump_json(indent=2))
    if not quiet:
        print(f"🌧️ Perturbed {', '.join(splits)} with '{disturbance.kind}' into {destination}")
    return sidecar
