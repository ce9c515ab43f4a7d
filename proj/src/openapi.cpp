#include "codm/api_service.hpp"

namespace codm {

namespace {

// Hand-maintained; tests/unit/test_api.cpp checks it against api_routes() and
// probes every documented operation.
constexpr const char* kOpenApi = R"json({
  "openapi": "3.0.3",
  "info": {
    "title": "co-DM service",
    "version": "1.0.0",
    "description": "Encounter rolling, prompt generation, brainstorm threads and feedback for a tabletop game master assistant."
  },
  "components": {
    "securitySchemes": {"bearer": {"type": "http", "scheme": "bearer"}},
    "parameters": {
      "id": {"name": "id", "in": "path", "required": true, "schema": {"type": "string"}},
      "seq": {"name": "seq", "in": "path", "required": true, "schema": {"type": "integer"}},
      "debug": {"name": "debug", "in": "query", "required": false, "schema": {"type": "boolean"},
                "description": "Include the exact prompt bundle sent to the provider."}
    },
    "schemas": {
      "Error": {
        "type": "object", "required": ["error", "message"],
        "properties": {
          "error": {"type": "string"}, "message": {"type": "string"},
          "attempts": {"type": "integer"}, "retry_after_ms": {"type": "integer"}, "transient": {"type": "boolean"}
        }
      },
      "Setting": {
        "type": "object", "required": ["id", "name", "description"],
        "properties": {"id": {"type": "string"}, "name": {"type": "string"}, "description": {"type": "string"},
                       "tags": {"type": "array", "items": {"type": "string"}}}
      },
      "Encounter": {
        "type": "object", "required": ["id", "setting_id", "rolled", "rendered", "created_at"],
        "properties": {
          "id": {"type": "string"}, "setting_id": {"type": "string"},
          "rolled": {"type": "array", "items": {"type": "object", "properties": {
            "monster_id": {"type": "string"}, "quantity": {"type": "integer"}}}},
          "rendered": {"type": "string"}, "flavor": {"type": "string", "nullable": true},
          "created_at": {"type": "string", "format": "date-time"}
        }
      },
      "TableEntry": {
        "type": "object", "required": ["weight", "monsters"],
        "properties": {
          "weight": {"type": "integer", "minimum": 1},
          "monsters": {"type": "array", "items": {"type": "object", "required": ["id", "quantity"],
            "properties": {"id": {"type": "string"}, "quantity": {"type": "string", "example": "2d4+1"}}}},
          "flavor": {"type": "string"}
        }
      },
      "ChatMessage": {
        "type": "object", "required": ["role", "content"],
        "properties": {"role": {"type": "string", "enum": ["system", "user", "assistant"]}, "content": {"type": "string"}}
      },
      "PromptBundle": {
        "type": "object", "required": ["interface_kind", "messages", "profile"],
        "properties": {
          "interface_kind": {"type": "string", "enum": ["summarization", "understanding", "brainstorm", "open_chat"]},
          "messages": {"type": "array", "items": {"$ref": "#/components/schemas/ChatMessage"}},
          "profile": {"type": "object"}, "profile_overridden": {"type": "boolean"}
        }
      },
      "GenerationRecord": {
        "type": "object", "required": ["id", "request_id", "interface_kind", "output_text", "attempts", "created_at"],
        "properties": {
          "id": {"type": "string"}, "request_id": {"type": "string"}, "interface_kind": {"type": "string"},
          "output_text": {"type": "string"}, "provider": {"type": "string"}, "latency_ms": {"type": "integer"},
          "attempts": {"type": "integer"}, "created_at": {"type": "string", "format": "date-time"},
          "thread_id": {"type": "string", "nullable": true}, "encounter_id": {"type": "string", "nullable": true},
          "bundle": {"$ref": "#/components/schemas/PromptBundle"}
        }
      },
      "StoredMessage": {
        "type": "object", "required": ["seq", "role", "content", "created_at"],
        "properties": {"seq": {"type": "integer"}, "role": {"type": "string"}, "content": {"type": "string"},
                       "user_id": {"type": "string", "nullable": true}, "created_at": {"type": "string"},
                       "pending": {"type": "boolean"}}
      },
      "Thread": {
        "type": "object", "required": ["id", "kind", "history", "round_count"],
        "properties": {
          "id": {"type": "string"}, "kind": {"type": "string", "enum": ["brainstorm", "open_chat"]},
          "encounter_id": {"type": "string", "nullable": true}, "visibility": {"type": "string"},
          "created_by": {"type": "string"}, "created_at": {"type": "string"}, "last_activity": {"type": "string"},
          "seed_count": {"type": "integer"}, "summary_included": {"type": "boolean"},
          "round_count": {"type": "integer"}, "participants": {"type": "array", "items": {"type": "string"}},
          "closed": {"type": "boolean"},
          "history": {"type": "array", "items": {"$ref": "#/components/schemas/StoredMessage"}},
          "pending": {"allOf": [{"$ref": "#/components/schemas/StoredMessage"}], "nullable": true}
        }
      },
      "Transcript": {
        "type": "object", "required": ["thread_id", "messages"],
        "properties": {"thread_id": {"type": "string"}, "kind": {"type": "string"},
                       "round_count": {"type": "integer"}, "messages": {"type": "array", "items": {"type": "object"}}}
      },
      "FeedbackRecord": {
        "type": "object", "required": ["id", "generation_id", "polarity"],
        "properties": {"id": {"type": "string"}, "generation_id": {"type": "string"},
                       "polarity": {"type": "string", "enum": ["positive", "negative"]},
                       "comment": {"type": "string", "nullable": true}, "user_id": {"type": "string"},
                       "created_at": {"type": "string"}}
      },
      "FeedbackTally": {
        "type": "object", "required": ["positive", "negative", "total_encounters"],
        "properties": {"positive": {"type": "integer"}, "negative": {"type": "integer"},
                       "total_encounters": {"type": "integer"}}
      }
    },
    "responses": {
      "Error": {"description": "Error", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Error"}}}}
    }
  },
  "security": [{"bearer": []}],
  "paths": {
    "/health": {"get": {"operationId": "health", "security": [],
      "responses": {"200": {"description": "Service is up"}}}},
    "/openapi.json": {"get": {"operationId": "openapi", "security": [],
      "responses": {"200": {"description": "This document"}}}},
    "/settings": {"get": {"operationId": "listSettings",
      "responses": {"200": {"description": "Settings", "content": {"application/json": {"schema": {
        "type": "array", "items": {"$ref": "#/components/schemas/Setting"}}}}}}}},
    "/tables": {"get": {"operationId": "listTables",
      "responses": {"200": {"description": "Configured encounter tables"}}}},
    "/encounters/roll": {"post": {"operationId": "rollEncounter",
      "requestBody": {"required": true, "content": {"application/json": {"schema": {
        "type": "object", "required": ["setting_id"],
        "properties": {"setting_id": {"type": "string"},
                       "table": {"oneOf": [
                         {"type": "string", "description": "Name of a configured table"},
                         {"type": "array", "description": "Inline table",
                          "items": {"$ref": "#/components/schemas/TableEntry"}}]},
                       "seed": {"type": "integer", "minimum": 0}}}}}},
      "responses": {
        "201": {"description": "Rolled encounter", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Encounter"}}}},
        "404": {"$ref": "#/components/responses/Error"}, "422": {"$ref": "#/components/responses/Error"}}}},
    "/encounters/{id}": {"get": {"operationId": "getEncounter",
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "responses": {
        "200": {"description": "Encounter", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Encounter"}}}},
        "404": {"$ref": "#/components/responses/Error"}}}},
    "/encounters/{id}/understand": {"post": {"operationId": "understandEncounter",
      "parameters": [{"$ref": "#/components/parameters/id"}, {"$ref": "#/components/parameters/debug"}],
      "requestBody": {"content": {"application/json": {"schema": {
        "type": "object",
        "properties": {"variant": {"type": "string", "enum": ["summarize", "understand"], "default": "summarize"},
                       "seed": {"type": "integer", "minimum": 0}, "debug": {"type": "boolean"}}}}}},
      "responses": {
        "201": {"description": "Generation", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/GenerationRecord"}}}},
        "404": {"$ref": "#/components/responses/Error"}, "422": {"$ref": "#/components/responses/Error"},
        "502": {"$ref": "#/components/responses/Error"}}}},
    "/encounters/{id}/brainstorm": {"post": {"operationId": "openBrainstorm",
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "requestBody": {"content": {"application/json": {"schema": {
        "type": "object",
        "properties": {"include_summary": {"type": "boolean", "default": false},
                       "seed": {"type": "integer", "minimum": 0}, "user_id": {"type": "string"}}}}}},
      "responses": {
        "201": {"description": "Brainstorm thread", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Thread"}}}},
        "404": {"$ref": "#/components/responses/Error"}, "409": {"$ref": "#/components/responses/Error"}}}},
    "/chat": {"post": {"operationId": "openChat",
      "requestBody": {"content": {"application/json": {"schema": {
        "type": "object", "properties": {"user_id": {"type": "string"}, "persona": {"type": "string"}}}}}},
      "responses": {
        "201": {"description": "Open chat thread", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Thread"}}}},
        "422": {"$ref": "#/components/responses/Error"}}}},
    "/threads/{id}": {"get": {"operationId": "getThread",
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "responses": {
        "200": {"description": "Thread", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Thread"}}}},
        "404": {"$ref": "#/components/responses/Error"}}}},
    "/threads/{id}/messages": {"post": {"operationId": "postMessage",
      "parameters": [{"$ref": "#/components/parameters/id"}, {"$ref": "#/components/parameters/debug"}],
      "requestBody": {"required": true, "content": {"application/json": {"schema": {
        "type": "object", "required": ["text"],
        "properties": {"text": {"type": "string"}, "user_id": {"type": "string"}, "debug": {"type": "boolean"}}}}}},
      "responses": {
        "201": {"description": "Assistant reply", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/GenerationRecord"}}}},
        "404": {"$ref": "#/components/responses/Error"}, "409": {"$ref": "#/components/responses/Error"},
        "422": {"$ref": "#/components/responses/Error"}, "502": {"$ref": "#/components/responses/Error"}}}},
    "/threads/{id}/retry": {"post": {"operationId": "retryPending",
      "parameters": [{"$ref": "#/components/parameters/id"}, {"$ref": "#/components/parameters/debug"}],
      "responses": {
        "201": {"description": "Assistant reply", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/GenerationRecord"}}}},
        "404": {"$ref": "#/components/responses/Error"}, "409": {"$ref": "#/components/responses/Error"},
        "502": {"$ref": "#/components/responses/Error"}}}},
    "/threads/{id}/reopen": {"post": {"operationId": "reopenThread",
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "responses": {
        "200": {"description": "Thread", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Thread"}}}},
        "404": {"$ref": "#/components/responses/Error"}}}},
    "/threads/{id}/export": {"get": {"operationId": "exportThread",
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "responses": {
        "200": {"description": "Transcript", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Transcript"}}}},
        "404": {"$ref": "#/components/responses/Error"}}}},
    "/threads/{id}/messages/{seq}/request": {"get": {"operationId": "replayRequest",
      "parameters": [{"$ref": "#/components/parameters/id"}, {"$ref": "#/components/parameters/seq"}],
      "responses": {
        "200": {"description": "Prompt bundle that produced the assistant message at seq",
                "content": {"application/json": {"schema": {"$ref": "#/components/schemas/PromptBundle"}}}},
        "404": {"$ref": "#/components/responses/Error"}, "422": {"$ref": "#/components/responses/Error"}}}},
    "/generations/{id}": {"get": {"operationId": "getGeneration",
      "parameters": [{"$ref": "#/components/parameters/id"}, {"$ref": "#/components/parameters/debug"}],
      "responses": {
        "200": {"description": "Generation", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/GenerationRecord"}}}},
        "404": {"$ref": "#/components/responses/Error"}}}},
    "/generations/{id}/feedback": {"post": {"operationId": "recordFeedback",
      "parameters": [{"$ref": "#/components/parameters/id"}],
      "requestBody": {"required": true, "content": {"application/json": {"schema": {
        "type": "object", "required": ["polarity"],
        "properties": {"polarity": {"type": "string", "enum": ["positive", "negative"]},
                       "comment": {"type": "string"}, "user_id": {"type": "string"}}}}}},
      "responses": {
        "201": {"description": "Feedback", "content": {"application/json": {"schema": {"$ref": "#/components/schemas/FeedbackRecord"}}}},
        "404": {"$ref": "#/components/responses/Error"}, "409": {"$ref": "#/components/responses/Error"}}}},
    "/feedback/tallies": {"get": {"operationId": "feedbackTallies",
      "responses": {"200": {"description": "Per-kind tallies", "content": {"application/json": {"schema": {
        "type": "object", "additionalProperties": {"$ref": "#/components/schemas/FeedbackTally"}}}}}}}}
  }
})json";

}  // namespace

const nlohmann::json& openapi_document() {
    static const nlohmann::json doc = nlohmann::json::parse(kOpenApi);
    return doc;
}

}  // namespace codm
