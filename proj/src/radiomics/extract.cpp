#include <functional>
#include <future>

#include "radsynth/radiomics/features.hpp"

namespace radsynth {

namespace {

// Runs the tasks, on up to `threads` workers, and returns once all finish.
// Results land in caller-owned slots so ordering never depends on timing.
void run_tasks(std::vector<std::function<void()>>& tasks, int threads) {
  if (threads <= 1) {
    for (auto& task : tasks) task();
    return;
  }
  std::vector<std::future<void>> running;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    running.push_back(std::async(std::launch::async, tasks[i]));
    if (static_cast<int>(running.size()) == threads) {
      for (auto& f : running) f.get();
      running.clear();
    }
  }
  for (auto& f : running) f.get();
}

FeatureVector texture_of(const DiscretizedRoi& roi, int threads, const BinaryMask* shape_mask,
                         FeatureVector* shape_out) {
  FeatureVector histogram, glcm, glszm, glrlm;
  std::vector<std::function<void()>> tasks{
      [&] { histogram = histogram_features(roi); },
      [&] { glcm = glcm_features(glcm_matrices(roi)); },
      [&] { glszm = glszm_features(roi); },
      [&] { glrlm = glrlm_features(roi); },
  };
  if (shape_mask) tasks.emplace_back([&] { *shape_out = shape_features(*shape_mask); });
  run_tasks(tasks, threads);
  FeatureVector out = histogram;
  out.append(glcm);
  out.append(glszm);
  out.append(glrlm);
  return out;
}

}  // namespace

FeatureVector extract_all(const VoxelVolume& v, const BinaryMask& m, const ExtractionConfig& config) {
  require_same_geometry(v, m);
  const auto [volume, mask] = crop_to_roi(v, m, 0);
  const DiscretizedRoi roi = discretize(volume, mask, config.discretization);
  FeatureVector shape;
  const FeatureVector texture = texture_of(roi, config.threads, &mask, &shape);
  shape.append(texture);
  return shape;
}

FeatureVector extract_texture(const VoxelVolume& v, const BinaryMask& m,
                              const ExtractionConfig& config) {
  const DiscretizedRoi roi = discretize(v, m, config.discretization);
  return texture_of(roi, config.threads, nullptr, nullptr);
}

}  // namespace radsynth
