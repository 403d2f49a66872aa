from flask_sqlalchemy import SQLAlchemy
from datetime import datetime

db = SQLAlchemy()


class VerificationReport(db.Model):
    """Отчёт проверки (verify, oeis-check, levelset)"""
    __tablename__ = 'verification_reports'

    id = db.Column(db.Integer, primary_key=True)
    command = db.Column(db.String(50), nullable=False)
    subject = db.Column(db.String(100))  # имя проверки или последовательности
    bound = db.Column(db.BigInteger)
    status = db.Column(db.String(10), nullable=False, default='pass')  # pass, fail, error
    message = db.Column(db.Text)
    violations = db.Column(db.Integer, default=0)
    payload = db.Column(db.JSON, default=dict)
    elapsed = db.Column(db.Float)
    created_at = db.Column(db.DateTime, default=datetime.utcnow)

    def __repr__(self):
        return f'<VerificationReport {self.command} {self.subject} - {self.status}>'

    def to_dict(self, with_payload: bool = True):
        data = {
            'id': self.id,
            'command': self.command,
            'subject': self.subject,
            'bound': self.bound,
            'status': self.status,
            'message': self.message,
            'violations': self.violations,
            'elapsed': self.elapsed,
            'created_at': self.created_at.strftime('%Y-%m-%d %H:%M:%S') if self.created_at else None,
        }
        if with_payload:
            data['payload'] = self.payload or {}
        return data


class LearnedAutomaton(db.Model):
    """Автомат, полученный обучением для множества уровня (гипотеза, проверенная до bound)"""
    __tablename__ = 'learned_automata'

    id = db.Column(db.Integer, primary_key=True)
    sequence = db.Column(db.String(50), nullable=False)
    epsilon = db.Column(db.Integer, nullable=False)
    bound = db.Column(db.BigInteger, nullable=False)
    num_states = db.Column(db.Integer, nullable=False)
    dfa_text = db.Column(db.Text, nullable=False)
    report_id = db.Column(db.Integer, db.ForeignKey('verification_reports.id'))
    created_at = db.Column(db.DateTime, default=datetime.utcnow)

    report = db.relationship('VerificationReport', backref=db.backref('automata', lazy='dynamic'))

    def __repr__(self):
        return f'<LearnedAutomaton {self.sequence} eps={self.epsilon} states={self.num_states}>'

    def to_dict(self):
        return {
            'id': self.id,
            'sequence': self.sequence,
            'epsilon': self.epsilon,
            'bound': self.bound,
            'num_states': self.num_states,
            'dfa': self.dfa_text,
            'conjecture': True,
            'verified_up_to': self.bound,
            'report_id': self.report_id,
            'created_at': self.created_at.strftime('%Y-%m-%d %H:%M:%S') if self.created_at else None,
        }
