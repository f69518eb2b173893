"""miniasm: a reconfigurable phase-pipeline framework with a miniature
de novo genome assembler built on top of it."""

from .seq import (
    BadK,
    InvalidBase,
    Kmer,
    MalformedRecord,
    PackedSeq,
    Read,
    UnknownFormat,
    canonical,
    check_k,
    decode,
    encode,
    kmers,
    read_sequences,
    reverse_complement,
    scan_records,
    write_fasta,
)
from .pipeline import (
    DataObject,
    DuplicatePipeline,
    EmptyPipeline,
    MissingKey,
    MissingPipelineName,
    OverwriteViolation,
    Phase,
    PhaseRegistry,
    PhaseReport,
    PhaseSpec,
    PipelineSpec,
    UnknownPhase,
    UnknownSnapshot,
    XmlSyntax,
    branch,
    parse_settings,
    run_phase,
    run_pipeline,
    serialize_settings,
    snapshot,
)
from .graph import (
    FORWARD,
    REVERSE,
    BadParam,
    CoverageStats,
    DeBruijnGraph,
    Path,
    UnknownNode,
    build_graph,
    coverage_histogram,
    degrees,
    extract_paths,
    find_tips,
    spell,
)
from .phases import (
    AssemblySettings,
    Contig,
    RepeatHit,
    build_registry,
    repeats,
    tandem_repeats,
    write_contig_file,
)

__version__ = "0.1.0"
