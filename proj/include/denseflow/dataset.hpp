#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

#include "denseflow/flow_io.hpp"
#include "denseflow/image_io.hpp"

namespace denseflow {

// Consecutive frames t and t+1 plus the ground-truth flow for frame t.
template <typename Scalar>
struct ScenePair {
    Image<Scalar> frame1;
    Image<Scalar> frame2;
    FlowFieldf gt;
    Mask gt_valid;
};

inline std::string frame_file_name(int index, const char* extension) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%04d%s", index, extension);
    return buf;
}

// Loads from a directory laid out as frame_0001.png, frame_0002.png, ... with
// matching frame_0001.flo ground truth (one flow per frame transition).
template <typename Scalar>
ScenePair<Scalar> load_scene_pair(const std::filesystem::path& dir, int frame_index) {
    const auto frame1_path = dir / frame_file_name(frame_index, ".png");
    const auto frame2_path = dir / frame_file_name(frame_index + 1, ".png");
    const auto flow_path = dir / frame_file_name(frame_index, ".flo");
    for (const auto& p : {frame1_path, frame2_path, flow_path}) {
        if (!std::filesystem::exists(p)) {
            throw IngestionError("missing file " + p.string());
        }
    }

    ScenePair<Scalar> scene;
    scene.frame1 = load_image<Scalar>(frame1_path);
    scene.frame2 = load_image<Scalar>(frame2_path);
    FloContents gt = read_flo_file(flow_path);
    if (scene.frame1.rows() != scene.frame2.rows() || scene.frame1.cols() != scene.frame2.cols()) {
        throw ConsistencyError("frame dimensions differ: "
                               + detail::dims_string(scene.frame1.cols(), scene.frame1.rows())
                               + " vs " + detail::dims_string(scene.frame2.cols(), scene.frame2.rows())
                               + " in " + dir.string());
    }
    if (gt.flow.height() != scene.frame1.rows() || gt.flow.width() != scene.frame1.cols()) {
        throw ConsistencyError("frames are "
                               + detail::dims_string(scene.frame1.cols(), scene.frame1.rows())
                               + " but ground truth is "
                               + detail::dims_string(gt.flow.width(), gt.flow.height())
                               + " in " + dir.string());
    }
    scene.gt = std::move(gt.flow);
    scene.gt_valid = std::move(gt.valid);
    return scene;
}

} // namespace denseflow
