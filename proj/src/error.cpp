#include "xneusm/error.hpp"

namespace xneusm {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::disconnected: return "Disconnected";
    case Errc::isolated_node: return "IsolatedNode";
    case Errc::duplicate_edge: return "DuplicateEdge";
    case Errc::self_loop: return "SelfLoop";
    case Errc::label_out_of_range: return "LabelOutOfRange";
    case Errc::syntax_error: return "SyntaxError";
    case Errc::label_space_mismatch: return "LabelSpaceMismatch";
    case Errc::unsatisfiable_stats: return "UnsatisfiableStats";
    case Errc::size_out_of_range: return "SizeOutOfRange";
    case Errc::negative_generation_failed: return "NegativeGenerationFailed";
    case Errc::io_error: return "IoError";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::domain_error: return "DomainError";
    case Errc::non_scalar_loss: return "NonScalarLoss";
    case Errc::degenerate_labels: return "DegenerateLabels";
    case Errc::missing_mapping: return "MissingMapping";
    case Errc::empty_true_pairs: return "EmptyTruePairs";
    case Errc::non_finite_loss: return "NonFiniteLoss";
  }
  return "Error";
}

}  // namespace xneusm
