#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parcelsense/geodata.hpp"
#include "parcelsense/labeler.hpp"

namespace parcelsense {

enum class ShapeKind { Rectangle, LShape, ThinStrip };

/// Corner of the bounding rectangle cut away from an L-shape.
enum class Corner { TopLeft, TopRight, BottomLeft, BottomRight };

struct ParcelShape {
  ParcelId id = 0;
  ShapeKind kind = ShapeKind::Rectangle;
  PixelRect rect;
  /// L-shapes only: size of the notch removed at `corner`.
  int notch_width = 0;
  int notch_height = 0;
  Corner corner = Corner::BottomRight;
  LandUseLabel label = LandUseLabel::M;

  bool contains(int x, int y) const;
};

struct WordStyle {
  std::string name;
  std::array<std::uint8_t, 3> color{};
  /// Land-use class this word votes for; nullopt for words such as roads.
  std::optional<LandUseLabel> land_use;
};

struct ClassTexture {
  /// (word index, weight); weights sum to 1.
  std::vector<std::pair<std::size_t, double>> mixture;
  /// Words used for small confuser objects painted over the parcel.
  std::vector<std::size_t> confusers;
};

struct SceneSpec {
  int width = 0;
  int height = 0;
  std::vector<WordStyle> words;
  /// Word painted on pixels outside every parcel.
  std::size_t background_word = 0;
  std::array<ClassTexture, kLandUseCount> textures;
  std::vector<ParcelShape> parcels;
  /// Side of the square cells that receive one mixture word each.
  int cell_size = 24;
  /// Per-band uniform noise in [-noise, noise] added to word colors.
  int noise = 12;
  /// Confuser objects: squares with side in [speckle_min, speckle_max]
  /// covering up to `speckle_density` of a parcel (drawn per parcel).
  int speckle_min = 7;
  int speckle_max = 10;
  double speckle_density = 0.0;
  std::uint64_t seed = 0;
};

struct Scene {
  RasterGrid raster;
  ParcelMap parcels;
  LabelTable labels;
  std::vector<std::string> vocabulary;
  std::vector<std::optional<LandUseLabel>> word_classes;
  /// Ground-truth word index per pixel.
  std::vector<std::uint16_t> word_map;
  /// Exact painted word composition per parcel, indexed like `vocabulary`.
  std::map<ParcelId, std::vector<double>> mixtures;
};

/// ConfigError for shapes that overlap or leave the frame, duplicate or zero
/// ids, unknown words, or mixtures that do not sum to 1.
Scene generate_scene(const SceneSpec& spec);

/// 1024x1024, 7 classes with at least 20 parcels each, rectangles, L-shapes
/// whose notch is owned by another parcel, and a few 5-pixel strips.
SceneSpec default_benchmark(std::uint64_t seed = 1);

/// A scene of strip parcels roughly 20 to 30 pixels thick.
SceneSpec thin_parcel_benchmark(std::uint64_t seed = 1);

/// Shared vocabulary and class textures of both benchmarks.
std::vector<WordStyle> benchmark_words();
std::array<ClassTexture, kLandUseCount> benchmark_textures();

/// Labels a patch by the majority ground-truth word of the scene pixels under
/// its extent (lowest word index on ties). Only meaningful for patches cut
/// from this scene.
class OracleLabeler final : public PatchLabeler {
 public:
  OracleLabeler(std::vector<std::string> vocabulary, int width, int height,
                std::span<const std::uint16_t> word_map);
  explicit OracleLabeler(const Scene& scene);

  const std::vector<std::string>& vocabulary() const override { return vocabulary_; }
  std::vector<std::size_t> label(std::span<const PatchSample> patches) const override;
  std::size_t label_rect(const PixelRect& rect) const;

 private:
  std::vector<std::string> vocabulary_;
  int width_;
  int height_;
  std::vector<std::uint32_t> tables_;  // one (w+1)x(h+1) summed-area table per word
};

/// raster.png, parcels.png, labels.csv, words.png (16-bit word index map),
/// vocabulary.txt, word_map.csv (`word,land_use`), mixtures.csv
/// (`parcel_id,<vocabulary>`), and if `training_patches` > 0 that many
/// single-word example images per word under patches/<word>/.
void write_scene(const std::filesystem::path& dir, const Scene& scene, int training_patches = 0,
                 std::uint64_t seed = 0, const SceneSpec* spec = nullptr);

/// A word-colored example image the same way parcels are painted.
RasterGrid word_swatch(const WordStyle& style, int side, int noise, Rng& rng);

}  // namespace parcelsense
