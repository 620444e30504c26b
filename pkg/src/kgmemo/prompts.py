"""Prompt catalog: one template per exchange kind, with named slots.

Slots are rendered by literal {name} substitution (never str.format), so
JSON braces inside templates survive untouched. Templates for answer
generation, query splitting, passage summarization and the different-mode
answer rederivation are this project's own; the rest follow the published
wording of the extraction/selection/filtering/judging prompts.
"""

from enum import Enum

from .errors import InvalidArgument


class PromptKind(str, Enum):
    EXTRACT_ENTITIES = "ExtractEntities"
    EXTRACT_RELATIONS = "ExtractRelations"
    SELECT_NODE = "SelectNode"
    FILTER_KG = "FilterKG"
    GENERATE_ANSWER = "GenerateAnswer"
    JUDGE_ANSWER = "JudgeAnswer"
    OPTION_SELECT = "OptionSelect"
    TRANSFORM_MCQ = "TransformMCQ"
    REWRITE_SIMILAR = "RewriteSimilar"
    REWRITE_DIFFERENT = "RewriteDifferent"
    REWRITE_ANSWER = "RewriteAnswer"
    SPLIT_QUERY = "SplitQuery"
    SUMMARIZE_CHUNK = "SummarizeChunk"


_ENTITY_EXTRACT = """Extract entities and entity relationships from the following text, then output the complete merged statements of entities and entity relationships.
An entity should be a simple and easy-to-understand word or phrase.
An entity should be a meaningful word or phrase. For example, in the sentence "David is seventeen years old," "David" is a meaningful entity, but "seventeen years old" is not.
An entity is a persistent concept with broad significance, not a temporary one. For example, "twenty years old," "one hundred dollars," or "building collapse" cannot be entities.
At the same time, an entity typically refers to a specific thing or concept with a clear identity or definition. For example, in the sentence "The distance between New York and Boston is not far," "New York" and "Boston" are entities, but "distance" is not.
When extracting entities, this process should be precise and deliberate, not arbitrary or careless.
Entity types include organizations, people, geographical locations, events, objects, professional concepts, etc.
An entity relationship is simply a predicate statement that describes the subject, object, and their relationship.
Please note that the entities you extract must not include conjunctions like 'or' or 'and'-they should be precise and standalone.

The output format is as follows:
["entity_1", "entity_2", ..., "entity_n"]

Example 1:
Given text: This travel guide is very detailed, including introductions to popular attractions, recommendations for local delicacies, and practical transportation guides.
Output:
["travel guide", "attractions introduction", "food recommendations", "transportation guide"]

Example 2:
Given text: In this world, police are supposed to catch thieves.
Output:
["police", "thieves"]

Please note: Your final output must strictly follow the required JSON format and should not include any additional content.

Given text: {text}
Output:
"""

_RELATION_EXTRACT = """For the chunk of text I'm about to input, it contains the following named entities: {entity_list}.
Please extract the relationships between these named entities. Each relationship should be a predicate phrase describing the connection between the subject and the object.
For example, in "Tom" "raises" "dog", "raises" is the relationship. After extracting a relationship, combine it with the subject and object to form a complete sentence.

Your final output should be a JSON-formatted list where each sub-list contains three elements:
[The subject of the relationship, The complete relationship sentence, The object of the relationship]

I'll provide some examples next for your reference when generating the output.

Example 1:
Given text: This travel guide is very detailed, including introductions to popular attractions, recommendations for local delicacies, and practical transportation guides.
Output:
[
  ["travel guide", "travel guide includes attractions introduction.", "attractions introduction"],
  ["travel guide", "travel guide includes food recommendations.", "food recommendations"],
  ["travel guide", "travel guide includes transportation guide.", "transportation guide"]
]

Example 2:
Given text: In this world, police are supposed to catch thieves.
Output:
[
  ["police", "police are supposed to catch thieves.", "thieves"]
]

Please note: Your final output must strictly follow the required JSON format and should not include any additional content.

Given text: {text}
Output:
"""

_NODE_SELECTION = """You are a comprehensive analysis expert currently executing a search in a knowledge graph, evaluating the current search path and determining the next search node.
The knowledge graph we've constructed is structured as follows:
Entities are divided into two types: one can be called a general **entity**, and the other, more specific, is referred to as an **anchor**.
Chunks are connected through anchors to achieve contextual linkage. Users search by querying general entity nodes until they reach an anchor node, thereby accessing the corresponding chunks.
Anchors can connect to both general entities and other anchors (and may also link to chunks), while queryable entities can only connect to other queryable entities or anchors.
You are currently at node **{c_node}**. Based on the current search path and the conditions for determining the next search node, combined with the information in the knowledge graph, please provide the most suitable next search node.
The already traversed path is composed of:
- **{entity_list}**: List of entities visited.
- **{chunk_list}**: List of chunks accessed.
- **{edge_list}**: List of edges traversed.
The adjacency relations of the current node **{c_node}** are:
- **{relation_cnode}**: Relations leading to the next searchable entity nodes.
- **{connection_cnode}**: Relations leading to the next anchor nodes connected to chunks.
Your visit history: {c_node_list}, please avoid repeatedly accessing the same node multiple times.
Additionally, I will provide you with summary information of the chunks bound to the anchors you have traversed and may potentially traverse for reference: {anchor_chunk_titles}.
Consider the following two types of information:
1. The semantic relationship between the already queried path, the summarized **{chunk_summary}**, and the original query **{query}**.
2. The edge weights of the nodes connected to the current node (in **{relation_cnode}** and **{connection_cnode}**). A higher weight indicates greater importance.
Determine the most suitable next node (which can be either a searchable entity node or an anchor node).
If the current node has no unexplored adjacent nodes, then based on (1), select the most suitable node from the already traversed path (each node in the path may still have unexplored connections. For example, in A -> B -> C, if C has no next node, you need to evaluate (1) and decide whether returning to B is the best choice. In this case, your task is simply to return B).
Note that you should never select a chunk that has already been selected.
Anchor nodes are connected to their contextual anchor nodes in the original document. If you need to access contextual information from a section, you can traverse through these anchors.
If the information already gathered is sufficient to answer the query, output the single word sufficient instead of a node.
Please first analyze the above steps, then derive your answer.
At the end of your response, provide the answer in the specified format-only the node type (either **entity** or **chunk**) followed by its ID, without additional explanatory text.
"""

_KG_FILTERING = """Now, I have completed a search in a knowledge graph database.

The structure of the constructed knowledge graph is as follows:
Entities are divided into two types: one can be called a general **entity**, and the other, more specific, is referred to as an **anchor**.
Chunks are connected through anchors to achieve contextual linkage. Users search by querying general entity nodes until they reach an anchor node, thereby accessing the corresponding chunks.
Anchors can connect to both general entities and other anchors (and may also link to chunks), while queryable entities can only connect to other queryable entities or anchors.

Please assist with the following analysis:

Based on the given search path, chunk summaries, and query, analyze which edges and chunks contain valuable information for answering the current query.
The current query is **{query}**, and the relationship edges of the search path are **{edge_list}**, which consists of nodes and chunks. The chunk summaries are **{chunk_summary}**.

1. **General Judgment Criteria**: Based on the summary text and previous responses, determine whether they are directly relevant to the current query.
   - **Relevant Criteria**: Can directly support/refute the conclusion of the question or provide key evidence.
   - **Irrelevant Criteria**: Redundant information, off-topic, or replaced by more accurate data.
2. **Chunk Relevance Assessment**: Apply the above criteria to each chunk in the summary.
3. **Edge Relevance Assessment**: Apply the above criteria to each edge.

The output should include your thought process followed by a JSON-formatted result. Refer to the example I provided.
Please note that the chunk_id must be a single positive integer only. For example, "chunk:1" is an incorrect chunk ID, while "1" is correct.
Also, please prioritize selecting valid information from the chunk whenever possible, as the chunk always contains the most complete information.

**Output Format**:
(Your thought process in here)
```cot-ans
{
  "edges": [list of useful edges (using edge IDs)],
  "chunks": [list of useful chunks (using chunk IDs)]
}
```
"""

_GENERATE_ANSWER = """Answer the question using only the information collected from the knowledge graph below.

Question: {query}

Relationship edges gathered along the search path:
{edge_list}

Passage summaries:
{chunk_summary}

Passage texts:
{chunk_texts}

If the information above is insufficient to answer the question, begin your reply with the exact token [INSUFFICIENT] followed by a short note on what is missing. Otherwise reply with the answer directly, without restating the question.
"""

_ANSWER_EVALUATION = """Given one question, there is a groundtruth and a predict answer.
Please decide whether they are the same or not in semantic.
Please only output True or False.
Question: {question}
groundtruth = {reference_answer}
predicted answer = {generated_output}

Only output one word(True or False), without any additional content.
"""

_OPTION_SELECTION = """Instruction: Given a question and an original answer, please rewrite the original answer.

If the original answer is not related to any option in the question, output "I don't know". Otherwise, rewrite the answer to only contain the actual response to the question without any related analysis or references.
If the Original answer outputs "I don't know", directly output "I don't know".
Please output the rewritten answer directly.

Question = {question}
Original answer = {generated-answer}
"""

_QUESTION_TRANSFORMATION = """I'm going to give you a question, the correct answer, and supporting evidence.
Based on this information, please rewrite the question as a multiple-choice question with four options.
In the multiple-choice question you create, the correct option should be {new-ans}.
When creating the incorrect options (distractors), make sure they are plausible based on the question and evidence, so test-takers can't easily guess the right answer.
Question: {query}
Correct answer: {ans}
Supporting evidence: {evidence}

When you output the question, provide only the question and its options (A, B, C, D).
Here's an example of the expected output format:

Example Output:
What is the capital of the United States?
A. New York
B. Washington
C. San Francisco
D. Los Angeles
"""

_SIMILAR_REWRITE = """Now I'll give you a question, and I want you to rewrite it as a different question that means the same thing but is phrased differently.
Original question: {query}

Example:
Original question: Is Beijing the capital of China?
Your Output: Is the capital of the People's Republic of China Beijing?

When you respond, just give me your rewritten question.
"""

_DIFFERENT_REWRITE = """Now I'll give you a question, and I want you to rephrase it in a way that remains as similar as possible to the original but may yield a different answer.
Please note that your rephrased question must be answerable based on the reference material.
Original question: {query}
Reference Material: {context}

Example:
Original question: Are both Beijing and Shanghai cities in China?
Your output: Are both Beijing and Chengdu cities in China?

When responding, just provide your rephrased question.
"""

_ANSWER_REWRITE = """Now I'll give you a question, and I want you to answer it based on the reference material.
Please note that your answer must come from the reference material.
Question: {query}
Reference Material: {context}

Example:
Original question: Are both Beijing and Shanghai cities in China?
Your output: Yes

When responding, just provide your answer.
"""

_SPLIT_QUERY = """Decide whether answering the user request below requires searching an external knowledge base, and if so, split it into at most {limit} standalone subqueries that can each be searched independently.

User request: {query}

Reply with JSON only, in the form:
{"retrieval": true, "subqueries": ["first standalone question", "second standalone question"]}
Use {"retrieval": false, "subqueries": []} when the request needs no search (greetings, small talk, pure math, requests about this conversation).
"""

_SUMMARIZE_CHUNK = """Summarize the following passage in one short sentence that can serve as its title. Mention the most specific entities the passage covers. Reply with the sentence only.

Passage: {text}
"""

TEMPLATES: dict[PromptKind, str] = {
    PromptKind.EXTRACT_ENTITIES: _ENTITY_EXTRACT,
    PromptKind.EXTRACT_RELATIONS: _RELATION_EXTRACT,
    PromptKind.SELECT_NODE: _NODE_SELECTION,
    PromptKind.FILTER_KG: _KG_FILTERING,
    PromptKind.GENERATE_ANSWER: _GENERATE_ANSWER,
    PromptKind.JUDGE_ANSWER: _ANSWER_EVALUATION,
    PromptKind.OPTION_SELECT: _OPTION_SELECTION,
    PromptKind.TRANSFORM_MCQ: _QUESTION_TRANSFORMATION,
    PromptKind.REWRITE_SIMILAR: _SIMILAR_REWRITE,
    PromptKind.REWRITE_DIFFERENT: _DIFFERENT_REWRITE,
    PromptKind.REWRITE_ANSWER: _ANSWER_REWRITE,
    PromptKind.SPLIT_QUERY: _SPLIT_QUERY,
    PromptKind.SUMMARIZE_CHUNK: _SUMMARIZE_CHUNK,
}

REQUIRED_SLOTS: dict[PromptKind, frozenset[str]] = {
    PromptKind.EXTRACT_ENTITIES: frozenset({"text"}),
    PromptKind.EXTRACT_RELATIONS: frozenset({"entity_list", "text"}),
    PromptKind.SELECT_NODE: frozenset({
        "c_node", "entity_list", "chunk_list", "edge_list", "relation_cnode",
        "connection_cnode", "c_node_list", "anchor_chunk_titles", "chunk_summary", "query",
    }),
    PromptKind.FILTER_KG: frozenset({"query", "edge_list", "chunk_summary"}),
    PromptKind.GENERATE_ANSWER: frozenset({"query", "edge_list", "chunk_summary", "chunk_texts"}),
    PromptKind.JUDGE_ANSWER: frozenset({"question", "reference_answer", "generated_output"}),
    PromptKind.OPTION_SELECT: frozenset({"question", "generated-answer"}),
    PromptKind.TRANSFORM_MCQ: frozenset({"new-ans", "query", "ans", "evidence"}),
    PromptKind.REWRITE_SIMILAR: frozenset({"query"}),
    PromptKind.REWRITE_DIFFERENT: frozenset({"query", "context"}),
    PromptKind.REWRITE_ANSWER: frozenset({"query", "context"}),
    PromptKind.SPLIT_QUERY: frozenset({"query", "limit"}),
    PromptKind.SUMMARIZE_CHUNK: frozenset({"text"}),
}

INSUFFICIENT_MARKER = "[INSUFFICIENT]"


def render(kind: PromptKind, slots: dict[str, object]) -> str:
    """Substitute {name} for every provided slot; reject missing required ones."""
    missing = REQUIRED_SLOTS[kind] - set(slots)
    if missing:
        raise InvalidArgument(f"{kind.value} prompt missing slots: {sorted(missing)}")
    out = TEMPLATES[kind]
    for name, value in slots.items():
        out = out.replace("{" + name + "}", str(value))
    return out
