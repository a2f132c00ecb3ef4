#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "patchdet/augmentation.hpp"
#include "patchdet/label.hpp"
#include "patchdet/patching.hpp"

namespace patchdet {

struct SourceEntry {
    std::string path;
    Verdict label = Verdict::Real;
    std::string generator = "none";  // "none" for real images
    std::string category;            // e.g. ffhq, metfaces, afhq2
};

struct SourceManifest {
    std::vector<SourceEntry> entries;

    /// Paths must be unique; real entries must carry generator "none".
    void validate() const;
};

enum class RecipeOrder { AugmentThenCrop, CropThenAugment };

const char* recipe_order_name(RecipeOrder order);

/// Declarative construction rule for one training dataset. The order field
/// decides the patch geometry: AugmentThenCrop augments the whole image and
/// then crops at random (JPEG-grid-misaligned) offsets; CropThenAugment cuts
/// grid-aligned patches first and augments each one on its own.
struct DatasetRecipe {
    std::string id;
    std::set<std::string> categories;  // semantic filter
    std::set<std::string> generators;  // synthetic entries must match; real always pass
    RecipeOrder order = RecipeOrder::CropThenAugment;
    int patches_per_image = 1;
    int patch_size = kDefaultPatchSize;
    bool jpeg_enabled = true;
    AugmentationConfig augmentation;

    bool operator==(const DatasetRecipe&) const = default;
};

/// The five built-in dataset rules, keyed "D1".."D5". Throws UnknownRecipe.
/// D4 ships with metfaces + afhq2; `d4_ideal` selects the metfaces-only
/// variant instead.
DatasetRecipe builtin_recipe(const std::string& id, bool d4_ideal = false);

std::vector<std::string> builtin_recipe_ids();

struct DatasetRow {
    std::string source;
    Verdict label = Verdict::Real;
    PatchRegion region;
    AugmentationLog log;
    std::string patch_file;  // set when a patch sink stored pixels
};

struct DatasetOutput {
    std::vector<DatasetRow> rows;
};

/// Decodes an image for materialization; the CLI injects the file decoder so
/// core code never touches codecs or the filesystem directly.
using ImageLoader = std::function<ImageBuffer(const std::string& path)>;

/// Optional consumer for materialized patch pixels; returns the stored
/// filename recorded in the manifest row. Called in row order.
using PatchSink = std::function<std::string(std::size_t row_index, const DatasetRow& row,
                                            const ImageBuffer& patch)>;

struct MaterializeOptions {
    PatchSink patch_sink;  // null = manifest only
    int workers = 1;
};

/// Build the patch-level dataset manifest for one recipe. Deterministic under
/// (recipe, manifest, seed); per-entry streams derive from the image path so
/// worker count cannot change the output. Throws EmptyAfterFilter.
DatasetOutput materialize(const DatasetRecipe& recipe, const SourceManifest& manifest,
                          std::uint64_t seed, const ImageLoader& loader,
                          const MaterializeOptions& options = {});

struct OrthogonalityConditions {
    bool semantic = false;          // disjoint category sets
    bool processing_order = false;  // different crop/augment order
    bool jpeg = false;              // different JPEG treatment
    bool generators = false;        // disjoint synthetic generator sets

    bool any() const { return semantic || processing_order || jpeg || generators; }
};

struct OrthogonalityPair {
    std::string first;
    std::string second;
    OrthogonalityConditions conditions;
};

struct OrthogonalityReport {
    std::vector<OrthogonalityPair> pairs;
};

/// Pairwise report of which orthogonality conditions hold between recipes.
OrthogonalityReport validate_orthogonality(const std::vector<DatasetRecipe>& recipes);

/// Training schedule constants emitted as a sidecar for external trainers;
/// nothing in this library consumes them.
struct TrainingConfigMetadata {
    double train_split = 0.8;
    double val_split = 0.2;
    std::string optimizer = "adam";
    std::string optimizer_params = "defaults";
    double initial_learning_rate = 0.001;
    double plateau_decay_factor = 10.0;
    int plateau_patience_epochs = 10;
    int early_stop_patience_epochs = 20;
    int max_epochs = 500;
    std::string loss = "cross-entropy";
    std::string backbone = "efficientnet-b4";
    std::string weight_init = "imagenet";
    int patch_size = kDefaultPatchSize;
};

}  // namespace patchdet
