#include "patchdet/recipes.hpp"

#include <unordered_set>

#include "patchdet/error.hpp"
#include "patchdet/parallel.hpp"
#include "patchdet/rng.hpp"

namespace patchdet {

namespace {

const std::set<std::string> kAllCategories = {"ffhq", "metfaces", "afhq2"};
const std::set<std::string> kAllGenerators = {"stylegan2", "stargan-v2", "taming", "facev2v",
                                              "score-based"};

}  // namespace

void SourceManifest::validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& entry : entries) {
        require(!entry.path.empty(), ErrorCode::InvalidParameter,
                "manifest entries need a path");
        require(seen.insert(entry.path).second, ErrorCode::InvalidParameter,
                "duplicate manifest path " + entry.path);
        if (entry.label == Verdict::Real)
            require(entry.generator == "none", ErrorCode::InvalidParameter,
                    "real entry " + entry.path + " must have generator 'none'");
    }
}

const char* recipe_order_name(RecipeOrder order) {
    return order == RecipeOrder::AugmentThenCrop ? "augment-then-crop" : "crop-then-augment";
}

DatasetRecipe builtin_recipe(const std::string& id, bool d4_ideal) {
    DatasetRecipe recipe;
    recipe.id = id;

    if (id == "D1") {
        recipe.categories = kAllCategories;
        recipe.generators = kAllGenerators;
        recipe.order = RecipeOrder::AugmentThenCrop;
        recipe.patches_per_image = 1;
        recipe.jpeg_enabled = true;
    } else if (id == "D2") {
        recipe.categories = kAllCategories;
        recipe.generators = kAllGenerators;
        recipe.order = RecipeOrder::CropThenAugment;
        recipe.patches_per_image = 1;
        recipe.jpeg_enabled = true;
    } else if (id == "D3") {
        recipe.categories = {"afhq2"};
        recipe.generators = {"stylegan2", "stargan-v2"};
        recipe.order = RecipeOrder::CropThenAugment;
        recipe.patches_per_image = 10;
        recipe.jpeg_enabled = false;
    } else if (id == "D4") {
        recipe.categories = d4_ideal ? std::set<std::string>{"metfaces"}
                                     : std::set<std::string>{"metfaces", "afhq2"};
        recipe.generators = d4_ideal ? std::set<std::string>{"stylegan2"}
                                     : std::set<std::string>{"stylegan2", "stargan-v2"};
        recipe.order = RecipeOrder::CropThenAugment;
        recipe.patches_per_image = 10;
        recipe.jpeg_enabled = false;
    } else if (id == "D5") {
        recipe.categories = {"ffhq"};
        recipe.generators = {"stylegan2", "taming", "facev2v", "score-based"};
        recipe.order = RecipeOrder::CropThenAugment;
        recipe.patches_per_image = 1;
        recipe.jpeg_enabled = true;
    } else {
        raise(ErrorCode::UnknownRecipe, "no built-in recipe named '" + id + "'");
    }
    return recipe;
}

std::vector<std::string> builtin_recipe_ids() {
    return {"D1", "D2", "D3", "D4", "D5"};
}

namespace {

bool entry_selected(const DatasetRecipe& recipe, const SourceEntry& entry) {
    if (!recipe.categories.empty() && !recipe.categories.contains(entry.category))
        return false;
    if (entry.label == Verdict::Synthetic && !recipe.generators.empty() &&
        !recipe.generators.contains(entry.generator))
        return false;
    return true;
}

struct EntryOutput {
    std::vector<DatasetRow> rows;
    std::vector<ImageBuffer> patches;  // filled only when a sink will consume them
};

EntryOutput materialize_entry(const DatasetRecipe& recipe, const SourceEntry& entry,
                              std::uint64_t seed, const ImageLoader& loader, bool keep_patches) {
    EntryOutput output;
    ImageBuffer source;
    try {
        source = loader(entry.path);
    } catch (const Error& e) {
        raise(e.code(), entry.path + ": " + e.message());
    } catch (const std::exception& e) {
        raise(ErrorCode::IoError, "failed to load " + entry.path + ": " + e.what());
    }

    AugmentationConfig config = recipe.augmentation;
    if (!recipe.jpeg_enabled)
        config.jpeg_prob = 0.0;

    const std::uint64_t entry_seed = derive_seed(seed, entry.path);

    try {
        if (recipe.order == RecipeOrder::AugmentThenCrop) {
            Rng augment_stream(derive_seed(entry_seed, "augment"));
            AugmentationResult augmented = apply_pipeline(source, config, augment_stream);

            SamplingPolicy sampling{SamplingMode::Random, recipe.patches_per_image,
                                    recipe.patch_size, derive_seed(entry_seed, "sample")};
            const auto regions = sample_patches(augmented.image, sampling);
            for (const auto& region : regions) {
                output.rows.push_back({entry.path, entry.label, region, augmented.log, ""});
                if (keep_patches)
                    output.patches.push_back(crop(augmented.image, region));
            }
        } else {
            SamplingPolicy sampling{SamplingMode::GridAligned, recipe.patches_per_image,
                                    recipe.patch_size, derive_seed(entry_seed, "sample")};
            const auto regions = sample_patches(source, sampling);
            for (std::size_t i = 0; i < regions.size(); ++i) {
                ImageBuffer patch = crop(source, regions[i]);
                Rng augment_stream(derive_seed(entry_seed, 0x100 + i));
                AugmentationResult augmented = apply_pipeline(patch, config, augment_stream);
                output.rows.push_back({entry.path, entry.label, regions[i],
                                       std::move(augmented.log), ""});
                if (keep_patches)
                    output.patches.push_back(std::move(augmented.image));
            }
        }
    } catch (const Error& e) {
        raise(e.code(), entry.path + ": " + e.message());
    }
    return output;
}

}  // namespace

DatasetOutput materialize(const DatasetRecipe& recipe, const SourceManifest& manifest,
                          std::uint64_t seed, const ImageLoader& loader,
                          const MaterializeOptions& options) {
    require(recipe.patches_per_image >= 1, ErrorCode::InvalidParameter,
            "patches_per_image must be >= 1");
    require(recipe.patch_size >= 1, ErrorCode::InvalidParameter, "patch_size must be >= 1");
    require(loader != nullptr, ErrorCode::InvalidParameter, "materialize needs an image loader");
    recipe.augmentation.validate();
    manifest.validate();

    std::vector<const SourceEntry*> selected;
    for (const auto& entry : manifest.entries)
        if (entry_selected(recipe, entry))
            selected.push_back(&entry);
    if (selected.empty())
        raise(ErrorCode::EmptyAfterFilter,
              "recipe " + recipe.id + " matches no entries of the source manifest");

    const bool keep_patches = static_cast<bool>(options.patch_sink);
    std::vector<EntryOutput> outputs(selected.size());
    parallel_for(selected.size(), options.workers, [&](std::size_t index) {
        outputs[index] =
            materialize_entry(recipe, *selected[index], seed, loader, keep_patches);
    });

    DatasetOutput result;
    std::size_t row_index = 0;
    for (auto& output : outputs) {
        for (std::size_t i = 0; i < output.rows.size(); ++i) {
            DatasetRow row = std::move(output.rows[i]);
            if (keep_patches)
                row.patch_file = options.patch_sink(row_index, row, output.patches[i]);
            result.rows.push_back(std::move(row));
            ++row_index;
        }
    }
    return result;
}

OrthogonalityReport validate_orthogonality(const std::vector<DatasetRecipe>& recipes) {
    require(recipes.size() >= 2, ErrorCode::InvalidParameter,
            "orthogonality needs at least two recipes");

    const auto disjoint = [](const std::set<std::string>& a, const std::set<std::string>& b) {
        if (a.empty() || b.empty())
            return false;  // empty filter means "everything"
        for (const auto& item : a)
            if (b.contains(item))
                return false;
        return true;
    };

    OrthogonalityReport report;
    for (std::size_t i = 0; i < recipes.size(); ++i) {
        for (std::size_t j = i + 1; j < recipes.size(); ++j) {
            const auto& a = recipes[i];
            const auto& b = recipes[j];
            OrthogonalityPair pair{a.id, b.id, {}};
            pair.conditions.semantic = disjoint(a.categories, b.categories);
            pair.conditions.processing_order = a.order != b.order;
            pair.conditions.jpeg = a.jpeg_enabled != b.jpeg_enabled;
            pair.conditions.generators = disjoint(a.generators, b.generators);
            report.pairs.push_back(std::move(pair));
        }
    }
    return report;
}

}  // namespace patchdet
