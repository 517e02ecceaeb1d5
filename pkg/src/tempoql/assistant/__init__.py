from .providers import ChatTurn, HttpProvider, MockProvider, ProviderConfig, ToolCall
from .flows import (
    AssistantOutcome,
    build_dataset_info,
    build_system_prompt,
    extract_code_blocks,
    run_tool_loop,
)

__all__ = [
    "ChatTurn", "HttpProvider", "MockProvider", "ProviderConfig", "ToolCall",
    "AssistantOutcome", "build_dataset_info", "build_system_prompt",
    "extract_code_blocks", "run_tool_loop",
]
