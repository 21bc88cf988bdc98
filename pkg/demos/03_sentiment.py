"""Training the bidirectional LSTM scorer on toy multilingual data.

Run: python demos/03_sentiment.py   (about ten seconds)
"""

# %% Labeled texts in three languages over one aligned embedding space
from distread.sentiment import ModelConfig, SentimentModel, TrainConfig, train, train_baseline
from distread.synthetic import make_training_set, make_vocabulary

vocab = make_vocabulary(seed=0)
table = vocab.table.normalize_rows()
data = make_training_set(vocab, 2000, seed=0)
for ex in data[:4]:
    print(ex.label, " ".join(ex.tokens))

# %% A small LSTM: two stacked bidirectional layers, mean pooling, sigmoid head
model = SentimentModel.init(ModelConfig(embed_dim=table.dim, hidden_dim=8), seed=0)
model, report = train(model, data, TrainConfig(epochs=4, seed=0), table)
for e in report.epochs:
    print(f"epoch {e.epoch}: train loss {e.train_loss:.4f}  valid acc {e.valid_accuracy:.3f}")
print("test accuracy:", report.test_accuracy, report.sizes)

# %% Scores for unseen sentences, one per language
for text in ("the film was wonderful", "der film war langweilig", "la película es hermosa", "kino heute"):
    print(f"{model.score_tokens(text.split(), table):.3f}  {text}")

# %% The mean-embedding logistic baseline, for comparison
baseline, base_report = train_baseline(data, table, TrainConfig(epochs=4, seed=0))
print("baseline test accuracy:", base_report.test_accuracy)
