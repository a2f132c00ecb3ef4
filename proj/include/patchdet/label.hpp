#pragma once

namespace patchdet {

/// Class label shared by verdicts, evaluation truth and dataset manifests.
enum class Verdict { Real, Synthetic };

const char* verdict_name(Verdict verdict);

}  // namespace patchdet
