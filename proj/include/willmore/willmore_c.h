/* C interface to the willmore library. All functions return WM_OK or an error code; the message of the
 * most recent failure on the calling thread is available from wm_last_error. Strings returned through
 * char** arguments are owned by the caller and released with wm_free_string. */
#ifndef WILLMORE_C_H
#define WILLMORE_C_H

#ifdef __cplusplus
extern "C" {
#endif

#define WM_OK 0
#define WM_ERR_IO 1             /* I/O, malformed input, schema */
#define WM_ERR_VALIDATION 2     /* invalid configuration or surface */
#define WM_ERR_NONCONVERGENCE 3 /* numerical non-convergence */

typedef struct wm_surface wm_surface;

const char* wm_version(void);
const char* wm_last_error(void);
void wm_free_string(char* s);

/* Solve a JSON run config into a surface. */
int wm_solve_config(const char* config_json, wm_surface** out);
/* Load (and re-validate) a surface file. */
int wm_surface_load(const char* surface_json, wm_surface** out);
int wm_surface_to_json(const wm_surface* s, char** out);
int wm_surface_end_count(const wm_surface* s, int* m);
void wm_surface_free(wm_surface* s);

/* options_json: {"index": bool, "energy": bool, "verify": bool, "field": {...}, "jacobi": [alpha...],
 * "jacobi_degree": int}. all_passed receives 1 when every verify check passed (may be NULL). */
int wm_analyze(const wm_surface* s, const char* options_json, char** report_json, char** summary,
               int* all_passed);
int wm_export_obj(const wm_surface* s, int inverted, int grid, char** obj);
int wm_scan_csv(int m, double re0, double re1, double im0, double im1, int n, char** csv);

#ifdef __cplusplus
}
#endif

#endif
