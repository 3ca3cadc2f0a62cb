#include <tee_internal_api.h>

TEE_Result TA_OpenSessionEntryPoint(uint32_t param_types, TEE_Param params[4],
				    void **sess_ctx)
{
	char session_id[64];

	(void)param_types;
	(void)sess_ctx;
	TEE_MemMove(session_id, params[0].memref.buffer, params[0].memref.size);
	DMSG("session opened");
	return TEE_SUCCESS;
}
