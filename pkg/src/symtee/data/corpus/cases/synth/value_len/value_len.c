#include <tee_internal_api.h>

static const char g_pattern[4096] = { 0x5a };

TEE_Result fill_pattern(uint32_t param_types, TEE_Param params[4])
{
    char scratch[512];

    (void)param_types;
    TEE_MemMove(scratch, g_pattern, params[0].value.a);
    return TEE_SUCCESS;
}
