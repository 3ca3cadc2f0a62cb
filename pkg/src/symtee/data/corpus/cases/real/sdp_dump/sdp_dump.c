#include <tee_internal_api.h>

static TEE_Result sdp_dump(uint32_t types, TEE_Param params[TEE_NUM_PARAMS])
{
	char trace[512];

	if (types != TEE_PARAM_TYPES(TEE_PARAM_TYPE_MEMREF_INOUT, TEE_PARAM_TYPE_NONE,
				     TEE_PARAM_TYPE_NONE, TEE_PARAM_TYPE_NONE))
		return TEE_ERROR_BAD_PARAMETERS;

	TEE_MemMove(trace, params[0].memref.buffer, params[0].memref.size);
	EMSG("dump request of %u bytes", (unsigned int)params[0].memref.size);
	return TEE_SUCCESS;
}
