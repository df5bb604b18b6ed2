#ifndef TXDIV_H
#define TXDIV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TxdivStatus {
  TXDIV_STATUS_OK = 0,
  TXDIV_STATUS_NULL_POINTER = 1,
  TXDIV_STATUS_INVALID_ARGUMENT = 2,
  TXDIV_STATUS_DEGENERATE_CHANNEL = 3,
  TXDIV_STATUS_CONFIG = 4,
  TXDIV_STATUS_PROTOCOL = 5,
  TXDIV_STATUS_IO = 6,
  TXDIV_STATUS_PANIC = 7,
} TxdivStatus;

typedef enum TxdivScheme {
  TXDIV_SCHEME_CDD = 0,
  TXDIV_SCHEME_ALAMOUTI_CDD = 1,
  TXDIV_SCHEME_QOSTBC = 2,
  TXDIV_SCHEME_MDC_QOSTBC = 3,
} TxdivScheme;

typedef enum TxdivRate {
  TXDIV_RATE_HALF = 0,
  TXDIV_RATE_EIGHT_NINTHS = 1,
} TxdivRate;

typedef enum TxdivModulation {
  TXDIV_MODULATION_QPSK = 0,
  TXDIV_MODULATION_QAM16 = 1,
} TxdivModulation;

typedef enum TxdivDetector {
  /**
   * LMMSE for QO-STBC, ML otherwise.
   */
  TXDIV_DETECTOR_AUTO = 0,
  TXDIV_DETECTOR_MLD = 1,
  TXDIV_DETECTOR_LMMSE = 2,
  TXDIV_DETECTOR_MAX_LOG_MLD = 3,
} TxdivDetector;

typedef enum TxdivAck {
  TXDIV_ACK_SUCCESS = 0,
  TXDIV_ACK_FAIL = 1,
} TxdivAck;

/**
 * Opaque HARQ session.
 */
typedef struct TxdivHarq TxdivHarq;

/**
 * Opaque simulation configuration.
 */
typedef struct TxdivSimConfig TxdivSimConfig;

typedef struct TxdivRunRecord {
  double snr_db;
  uint64_t frames;
  uint64_t frame_errors;
  uint64_t bit_errors;
  double fer;
  double ber;
  double fer_ci_lo;
  double fer_ci_hi;
} TxdivRunRecord;

typedef struct TxdivComplex {
  double re;
  double im;
} TxdivComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *txdiv_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *txdiv_version(void);

/**
 * New configuration with the reference defaults (4×2, QPSK, TU6, 512
 * subcarriers, 100 errors / 20000 frames) and a single SNR point of 0 dB.
 */
enum TxdivStatus txdiv_sim_config_new(enum TxdivScheme scheme,
                                      enum TxdivRate rate,
                                      struct TxdivSimConfig **out);

/**
 * Configuration from a JSON document (the format written next to CSV
 * outputs).
 */
enum TxdivStatus txdiv_sim_config_from_json(const char *json, struct TxdivSimConfig **out);

void txdiv_sim_config_free(struct TxdivSimConfig *cfg);

enum TxdivStatus txdiv_sim_config_set_stop_rule(struct TxdivSimConfig *cfg,
                                                uint64_t min_errors,
                                                uint64_t max_frames);

enum TxdivStatus txdiv_sim_config_set_seed(struct TxdivSimConfig *cfg, uint64_t seed);

enum TxdivStatus txdiv_sim_config_set_link(struct TxdivSimConfig *cfg,
                                           size_t nr,
                                           enum TxdivModulation modulation,
                                           enum TxdivDetector detector);

/**
 * Configuration as JSON. On success `*out` must be released with
 * [`txdiv_string_free`].
 */
enum TxdivStatus txdiv_sim_config_to_json(const struct TxdivSimConfig *cfg, char **out);

void txdiv_string_free(char *s);

/**
 * Runs one SNR point under the configured stop rule.
 */
enum TxdivStatus txdiv_run_point(const struct TxdivSimConfig *cfg,
                                 double snr_db,
                                 struct TxdivRunRecord *out);

/**
 * Symbolwise ML detection of one MDC-QOSTBC codeword.
 *
 * `r` holds `4 * nr` received samples, slot-major (`r[t * nr + rx]`); `h`
 * is the `nr × 4` effective channel, row-major, with the power scaling
 * included. Writes 4 symbols to `symbols` and `4 * log2(M)` LLRs to
 * `llrs`.
 */
enum TxdivStatus txdiv_mdc_detect(const struct TxdivComplex *r,
                                  const struct TxdivComplex *h,
                                  size_t nr,
                                  double noise_variance,
                                  enum TxdivModulation modulation,
                                  bool max_log,
                                  struct TxdivComplex *symbols,
                                  double *llrs);

/**
 * Hypotheses per independent ML search (QO-STBC pair `M²`, MDC-QOSTBC
 * `M`, orthogonal schemes `√M`).
 */
enum TxdivStatus txdiv_search_space(enum TxdivScheme scheme,
                                    enum TxdivModulation modulation,
                                    uint64_t *out);

/**
 * New HARQ session carrying one MDC-QOSTBC codeword. `four_stages`
 * sends rows 3 and 4 separately; `independent_channel` redraws the
 * channel for every row.
 */
enum TxdivStatus txdiv_harq_new(size_t nr,
                                enum TxdivModulation modulation,
                                bool four_stages,
                                bool independent_channel,
                                double snr_db,
                                uint64_t seed,
                                uint64_t session,
                                struct TxdivHarq **out);

void txdiv_harq_free(struct TxdivHarq *h);

/**
 * Sends the next round; `rows_sent` receives the number of codeword rows
 * in it.
 */
enum TxdivStatus txdiv_harq_transmit(struct TxdivHarq *h, size_t *rows_sent);

/**
 * Decodes everything received so far and records the genie ACK.
 * `diversity` receives the transmit diversity level of the accumulated
 * rows (1, 2, 4), or 0 where none is defined.
 */
enum TxdivStatus txdiv_harq_acknowledge(struct TxdivHarq *h,
                                        enum TxdivAck *ack,
                                        uint32_t *diversity);

/**
 * Whether the session ended (ACK received or all rounds used).
 */
enum TxdivStatus txdiv_harq_finished(const struct TxdivHarq *h, bool *finished);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TXDIV_H */
