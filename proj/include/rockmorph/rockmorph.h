/* rockmorph -- particle morphometry and synthetic-data toolkit, C API.
 *
 * Conventions:
 *   - Every function returns an rm_status; RM_OK (0) means success.
 *   - On failure, rm_last_error() returns a thread-local message.
 *   - Objects are opaque handles freed with their rm_*_free function.
 *   - Structured inputs and outputs are JSON strings (UTF-8); strings
 *     returned through char** are heap-allocated and must be released
 *     with rm_string_free.
 *   - Lengths are meters unless a loader's unit_scale says otherwise;
 *     weights come out in kilograms.
 */

#ifndef ROCKMORPH_H
#define ROCKMORPH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rm_status {
  RM_OK = 0,
  RM_ERR_INVALID_ARGUMENT = 1, /* caller violated a precondition */
  RM_ERR_PARSE = 2,            /* malformed input file or JSON */
  RM_ERR_IO = 3,               /* filesystem failure */
  RM_ERR_DOMAIN = 4,           /* input outside the operation's domain */
  RM_ERR_INTERNAL = 5
} rm_status;

typedef struct rm_mesh rm_mesh;
typedef struct rm_cloud rm_cloud;

const char* rm_version(void);

/* Thread-local message describing the most recent failure. */
const char* rm_last_error(void);

void rm_string_free(char* s);

/* Caps worker-thread parallelism; 0 restores the hardware default. */
rm_status rm_set_threads(int n);

/* ------------------------------------------------------------------ */
/* Meshes                                                              */

/* OBJ or PLY; coordinates are multiplied by unit_scale on load. */
rm_status rm_mesh_load(const char* path, double unit_scale, rm_mesh** out);
rm_status rm_mesh_save(const rm_mesh* mesh, const char* path);
void rm_mesh_free(rm_mesh* mesh);

/* {vertices, faces, watertight, volume?, surface_area, centroid?, bbox} */
rm_status rm_mesh_stats_json(const rm_mesh* mesh, char** json_out);

/* Translates the mesh so its vertex mean sits at the origin. */
rm_status rm_mesh_recenter(rm_mesh* mesh);

/* Quadric edge-collapse simplification to at most target_faces. */
rm_status rm_mesh_decimate(rm_mesh* mesh, int target_faces);

/* ------------------------------------------------------------------ */
/* Image segmentation and 2D morphology                                */

/* Segments a PNG/JPEG/PPM photo into a P5 PGM mask (255 = foreground).
 * options_json keys (all optional): gamma, method ("otsu"|"fixed"|
 * "adaptive"), fixed_value, adaptive_window, adaptive_offset,
 * largest_only, max_dimension.
 * report_json (optional out): chosen channel, references, threshold,
 * component count. */
rm_status rm_segment(const char* image_path, const char* options_json, const char* out_mask_pgm,
                     char** report_json);

/* 2D descriptor report for a PGM mask. options_json keys: scale
 * (length/pixel), or ball_mask + ball_diameter to calibrate, plus
 * assumed_fer3d for the volume estimate (default 2.0). */
rm_status rm_morph2d(const char* mask_pgm, const char* options_json, char** report_json);

/* Gradation (histogram + cumulative curve) over many masks.
 * options_json keys: scale, metric ("esd"|"fer"), bins.
 * csv_out (optional) receives the gradation table. */
rm_status rm_gradation(const char* const* mask_paths, size_t n_masks, const char* options_json,
                       char** report_json, char** csv_out);

/* ------------------------------------------------------------------ */
/* Three-view volumetric reconstruction                                */

/* config_json keys: top/front/side (PGM paths), ball_top/ball_front/
 * ball_side (equivalent pixel diameters), ball_diameter (physical),
 * optional c1, specific_gravity, max_resolution.
 * Report: raw_volume, c1, c2, corrected_volume, weight, units. */
rm_status rm_triview(const char* config_json, char** report_json);

/* c2 = (1 - (t-1)/(t*r_ball-1))^3 */
rm_status rm_resolution_correction(double r_ball, double t, double* c2_out);

/* ------------------------------------------------------------------ */
/* 3D morphology                                                       */

/* {a, b, c, fer3d, sphericity, volume, surface_area, box_rotation} */
rm_status rm_morph3d(const rm_mesh* mesh, char** report_json);

/* Multi-view 2D statistics (n_views silhouettes from uniform directions).
 * csv_out (optional) holds the per-view table. */
rm_status rm_multiview_stats(const rm_mesh* mesh, int n_views, uint64_t seed, char** report_json,
                             char** csv_out);

/* ------------------------------------------------------------------ */
/* Dataset generators                                                  */

/* Synthetic stockpile scene from a directory of watertight meshes.
 * config_json keys mirror the stockpile configuration (see README);
 * "category" selects an RR3/RR4/mix preset to start from. Writes
 * cloud.ply, cloud.csv and manifest.json under out_dir. */
rm_status rm_gen_stockpile(const char* library_dir, const char* config_json, uint64_t seed,
                           const char* out_dir, char** summary_json);

/* Partial-complete shape pair dataset (model/orientation/visibility
 * layout plus manifest.json). config_json keys mirror the pair
 * configuration (see README). */
rm_status rm_gen_pairs(const char* library_dir, const char* config_json, uint64_t seed,
                       const char* out_dir, char** summary_json);

/* ------------------------------------------------------------------ */
/* Point clouds and evaluation                                         */

/* PLY (binary or ascii) or CSV, by extension. */
rm_status rm_cloud_load(const char* path, rm_cloud** out);
rm_status rm_cloud_save(const rm_cloud* cloud, const char* path);
void rm_cloud_free(rm_cloud* cloud);
rm_status rm_cloud_size(const rm_cloud* cloud, size_t* out);

/* Greedy instance matching by bounding-box IoU at the threshold;
 * reports completeness and mean matched IoU (both percent). csv_out
 * (optional) receives the per-match score table. */
rm_status rm_eval_segmentation(const rm_cloud* predicted, const rm_cloud* truth,
                               double iou_threshold, char** report_json, char** csv_out);

/* Symmetric L1 Chamfer distance between two clouds. */
rm_status rm_chamfer(const rm_cloud* a, const rm_cloud* b, double* out);

/* Shape percentage of the whole cloud (directions from the centroid). */
rm_status rm_shape_percentage(const rm_cloud* cloud, int n_rays, double angular_tol_deg,
                              double* sp_out);

/* Per-instance shape percentage with pass flags at the threshold. */
rm_status rm_sp_filter(const rm_cloud* cloud, double threshold, int n_rays,
                       double angular_tol_deg, char** report_json);

/* Radius-graph connected-component clustering; labels the cloud's
 * points with fresh instance ids (-1 for dropped components). */
rm_status rm_cluster(const rm_cloud* cloud, double radius, size_t min_size,
                     rm_cloud** labeled_out, char** report_json);

/* Farthest-point downsampling to n points. */
rm_status rm_fps(const rm_cloud* cloud, size_t n, uint64_t seed, rm_cloud** out);

/* mass = volume * specific_gravity * water_density(1000) */
rm_status rm_weight_from_volume(double volume_m3, double specific_gravity, double* kg_out);

#ifdef __cplusplus
}
#endif

#endif /* ROCKMORPH_H */
