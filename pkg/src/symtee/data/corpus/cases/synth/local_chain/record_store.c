#include <tee_internal_api.h>

#define RECORD_MAX 384

static TEE_Result store_record(uint32_t param_types, TEE_Param params[4])
{
    char record[RECORD_MAX];
    uint32_t n;

    (void)param_types;
    n = params[1].memref.size;
    TEE_MemMove(record, params[1].memref.buffer, n);
    return TEE_SUCCESS;
}
