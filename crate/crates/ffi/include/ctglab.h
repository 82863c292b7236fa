#ifndef CTGLAB_H
#define CTGLAB_H

#include <stddef.h>
#include <stdint.h>

// Result of every call.
typedef enum CtgStatus {
  CTG_STATUS_OK = 0,
  CTG_STATUS_NULL_POINTER = 1,
  CTG_STATUS_INVALID_UTF8 = 2,
  CTG_STATUS_PARSE = 3,
  CTG_STATUS_INVALID_SPEC = 4,
  CTG_STATUS_DIMENSION_MISMATCH = 5,
  CTG_STATUS_BUFFER_TOO_SMALL = 6,
  CTG_STATUS_INCOMPATIBLE = 7,
  CTG_STATUS_CONFIG = 8,
  CTG_STATUS_MISSING_DATA = 9,
  CTG_STATUS_IO = 10,
  CTG_STATUS_PANIC = 11,
  CTG_STATUS_INTERNAL = 12,
} CtgStatus;

// Opaque MDP handle.
typedef struct CtgMdp CtgMdp;

// Opaque policy handle.
typedef struct CtgPolicy CtgPolicy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread; do not free.
const char *ctg_last_error_message(void);

// Parses and validates an MDP from JSON.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum CtgStatus ctg_mdp_from_json(const char *json, struct CtgMdp **out);

// Releases an MDP handle. NULL is ignored.
//
// # Safety
// `mdp` must come from this library and not be used afterwards.
void ctg_mdp_free(struct CtgMdp *mdp);

// Counts structural violations in an MDP given as JSON; 0 means valid.
//
// # Safety
// `json` must be a NUL-terminated string; `num_violations` must be writable.
enum CtgStatus ctg_mdp_validate(const char *json, size_t *num_violations);

// Number of states, actions and steps.
//
// # Safety
// `mdp` must be a live handle; the out pointers must be writable.
enum CtgStatus ctg_mdp_dims(const struct CtgMdp *mdp,
                            size_t *num_states,
                            size_t *num_actions,
                            size_t *horizon);

// Builds the cliff corridor with default costs; returns the MDP and its expert.
//
// # Safety
// Both out pointers must be writable.
enum CtgStatus ctg_make_cliff_corridor(size_t width,
                                       size_t height,
                                       double slip,
                                       size_t horizon,
                                       struct CtgMdp **out_mdp,
                                       struct CtgPolicy **out_expert);

// Optimal deterministic policy by backward induction.
//
// # Safety
// `mdp` must be a live handle; `out` must be writable.
enum CtgStatus ctg_optimal_policy(const struct CtgMdp *mdp, struct CtgPolicy **out);

// Parses a policy from JSON.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum CtgStatus ctg_policy_from_json(const char *json, struct CtgPolicy **out);

// Serializes a policy; free the result with [`ctg_string_free`].
//
// # Safety
// `policy` must be a live handle; `out` must be writable.
enum CtgStatus ctg_policy_to_json(const struct CtgPolicy *policy, char **out);

// Releases a policy handle. NULL is ignored.
//
// # Safety
// `policy` must come from this library and not be used afterwards.
void ctg_policy_free(struct CtgPolicy *policy);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void ctg_string_free(char *s);

// Exact expected total cost of `policy` on `mdp`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum CtgStatus ctg_policy_value(const struct CtgMdp *mdp,
                                const struct CtgPolicy *policy,
                                double *out);

// Exact Q table, `T * S * A` values laid out as `[k - 1][s][a]` where `k`
// is the number of steps remaining. `required` always receives the length;
// a short buffer yields `CTG_STATUS_BUFFER_TOO_SMALL` and is left untouched.
//
// # Safety
// Handles must be live; `buf` must hold `len` doubles; `required` must be writable.
enum CtgStatus ctg_exact_q(const struct CtgMdp *mdp,
                           const struct CtgPolicy *policy,
                           double *buf,
                           size_t len,
                           size_t *required);

// Exact state distribution at every step, `T * S` values laid out as
// `[t - 1][s]`. Buffer protocol as in [`ctg_exact_q`].
//
// # Safety
// Handles must be live; `buf` must hold `len` doubles; `required` must be writable.
enum CtgStatus ctg_state_distributions(const struct CtgMdp *mdp,
                                       const struct CtgPolicy *policy,
                                       double *buf,
                                       size_t len,
                                       size_t *required);

// Runs an experiment from TOML text, writes its report files under
// `out_dir`, and returns the summary document as JSON (free with
// [`ctg_string_free`]). `out_summary` may be NULL.
//
// # Safety
// Strings must be NUL-terminated; `out_summary` must be NULL or writable.
enum CtgStatus ctg_run_experiment(const char *config_toml, const char *out_dir, char **out_summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CTGLAB_H */
